#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "valuesim/valuesim.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(VALUESIM_FIXTURE_DIR) / name;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("valuesim-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline valuesim::Questionnaire pvq() {
  return valuesim::load_questionnaire_file(fixture("pvq_synthetic.json").string());
}

template <typename F>
valuesim::Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const valuesim::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a valuesim::Error");
}

}  // namespace testing_support

#define EXPECT_ERRC(expr, code) EXPECT_EQ(testing_support::error_code_of([&] { (void)(expr); }), valuesim::Errc::code)
