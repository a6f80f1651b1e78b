#pragma once

#include "valuesim/alignment.hpp"
#include "valuesim/digest.hpp"
#include "valuesim/eigen.hpp"
#include "valuesim/error.hpp"
#include "valuesim/experiment.hpp"
#include "valuesim/llm_client.hpp"
#include "valuesim/matrix.hpp"
#include "valuesim/matrix_io.hpp"
#include "valuesim/mds.hpp"
#include "valuesim/mock.hpp"
#include "valuesim/parsing.hpp"
#include "valuesim/persona_behavior.hpp"
#include "valuesim/planted.hpp"
#include "valuesim/population.hpp"
#include "valuesim/procrustes.hpp"
#include "valuesim/prompting.hpp"
#include "valuesim/questionnaire.hpp"
#include "valuesim/random.hpp"
#include "valuesim/response_store.hpp"
#include "valuesim/stats.hpp"
#include "valuesim/values.hpp"
