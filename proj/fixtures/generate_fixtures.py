"""Regenerates the synthetic fixtures in this directory.

All instruments, statements, priors and reference matrices here are synthetic
test material, not published instruments or measured data.
"""
import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))

VALUES = ["power", "achievement", "hedonism", "stimulation", "self-direction",
          "universalism", "benevolence", "tradition", "conformity", "security"]

VALUE_ITEMS = {
    "power": ["be the one who makes the decisions", "have a lot of money and influence",
              "be in charge of others", "be admired for what they own"],
    "achievement": ["be very successful", "show how capable they are",
                    "reach goals others find hard", "be recognized for their accomplishments"],
    "hedonism": ["have a good time", "enjoy life's pleasures",
                 "do things that give them pleasure", "treat themself well"],
    "stimulation": ["try new and exciting things", "take risks for adventure",
                    "have a varied and changing life", "look for surprises"],
    "self-direction": ["form their own opinions", "make their own choices",
                       "learn things on their own", "be free to plan their own activities"],
    "universalism": ["protect the natural environment", "treat every person fairly",
                     "understand people who differ from them", "work for a peaceful world"],
    "benevolence": ["be loyal to their friends", "help the people around them",
                    "care for the wellbeing of people close to them", "be someone others can rely on"],
    "tradition": ["keep the customs they grew up with", "be modest and humble",
                  "follow the practices of their faith", "respect long-standing traditions"],
    "conformity": ["never upset other people", "follow rules even when unobserved",
                   "behave properly at all times", "obey the people in charge"],
    "security": ["live in safe surroundings", "have a stable government",
                 "avoid anything that could endanger them", "keep order in society"],
}

REVERSED_VALUE_ITEMS = {("power", 3), ("tradition", 3)}


def fnv1a64(s):
    h = 0xcbf29ce484222325
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001b3) & 0xFFFFFFFFFFFFFFFF
    return h


def behavior_angle(name):
    return 2.0 * math.pi * (fnv1a64(name) % 1000000) / 1.0e6


def value_angle(i):
    return 2.0 * math.pi * i / 10.0


def write_json(name, doc):
    with open(os.path.join(HERE, name), "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, ensure_ascii=False)
        f.write("\n")


def pvq():
    items = []
    n = 0
    for c in VALUES:
        for k, phrase in enumerate(VALUE_ITEMS[c]):
            n += 1
            rev = (c, k) in REVERSED_VALUE_ITEMS
            text = ("It matters little to this person to " if rev else "It is important to this person to ") + phrase + "."
            items.append({"id": "pvq%02d" % n, "text": text, "construct": c, "reverse_keyed": rev})
    anchors = {"1": "Not like me at all", "2": "Not like me", "3": "A little like me",
               "4": "Moderately like me", "5": "Like me", "6": "Very much like me"}
    return {"name": "pvq-synthetic", "scale": {"min": 1, "max": 6, "anchors": anchors},
            "constructs": VALUES, "items": items}


BFI_DOMAINS = {
    "extraversion": ["is outgoing and sociable", "is full of energy", "takes charge in groups",
                     "talks a lot", "is enthusiastic", "likes to be the center of attention"],
    "agreeableness": ["is compassionate", "is respectful toward others", "assumes the best about people",
                      "is helpful and unselfish", "forgives easily", "is polite"],
    "conscientiousness": ["is organized", "is reliable", "keeps working until a task is done",
                          "is tidy", "plans ahead", "follows through on commitments"],
    "negative-emotionality": ["worries a lot", "gets upset easily", "feels tense",
                              "has frequent mood swings", "feels insecure", "dwells on mistakes"],
    "open-mindedness": ["is curious about many things", "enjoys art and music", "is inventive",
                        "likes to think about abstract ideas", "values new experiences", "is imaginative"],
}


def bfi():
    items = []
    n = 0
    for d, phrases in BFI_DOMAINS.items():
        for p in phrases:
            for rev in (False, True):
                n += 1
                text = ("I am not someone who " if rev else "I am someone who ") + p + "."
                items.append({"id": "bfi%02d" % n, "text": text, "construct": d, "reverse_keyed": rev})
    anchors = {"1": "Disagree strongly", "2": "Disagree a little", "3": "Neutral",
               "4": "Agree a little", "5": "Agree strongly"}
    return {"name": "bfi2-synthetic", "scale": {"min": 1, "max": 5, "anchors": anchors},
            "constructs": list(BFI_DOMAINS), "items": items}


EBQ_BEHAVIORS = {
    "environmental-action": ["recycled household waste", "chose a product because it was eco-friendly",
                             "reduced energy use at home"],
    "charitable-giving": ["donated money to a charity", "gave items to someone in need",
                          "contributed to a fundraiser"],
    "risk-taking": ["did something dangerous for the thrill", "made a risky bet",
                    "tried an extreme sport"],
    "rule-following": ["waited for a walk signal with no traffic", "followed a rule you disagreed with",
                       "returned extra change to a cashier"],
    "status-seeking": ["bought something to impress others", "sought a leadership role",
                       "talked about your achievements"],
    "religious-practice": ["attended a religious service", "prayed or meditated in a religious way",
                           "observed a religious holiday"],
    "novelty-seeking": ["visited a place you had never been", "tried an unfamiliar food",
                        "picked up a new hobby"],
    "caregiving": ["helped a friend with a personal problem", "took care of a sick family member",
                   "spent time supporting a neighbor"],
}


def ebq():
    items = []
    n = 0
    for b, acts in EBQ_BEHAVIORS.items():
        for a in acts:
            n += 1
            items.append({"id": "ebq%02d" % n, "text": "In the past year, how often have you " + a + "?",
                          "construct": b})
    anchors = {"1": "Never", "2": "Rarely", "3": "Sometimes", "4": "Often", "5": "Very often"}
    return {"name": "ebq-synthetic", "scale": {"min": 1, "max": 5, "anchors": anchors},
            "constructs": list(EBQ_BEHAVIORS), "items": items}


STATEMENT_BEHAVIORS = {
    "support-traditional-institutions": (["politically-conservative"], "traditional institutions such as the family and the church"),
    "lower-taxes": (["politically-conservative", "economic"], "cutting taxes even if public services shrink"),
    "strict-law-enforcement": (["politically-conservative"], "tougher policing and sentencing"),
    "expand-social-programs": (["politically-liberal", "economic"], "expanding public healthcare and welfare"),
    "climate-policy": (["politically-liberal", "environment"], "strong government action on climate change"),
    "immigration-openness": (["politically-liberal"], "welcoming more immigrants into the country"),
    "entrepreneurship": (["career"], "starting your own business"),
    "extreme-sports": (["lifestyle"], "taking up skydiving or other extreme sports"),
    "volunteering": (["prosocial"], "volunteering time for community projects"),
    "luxury-spending": (["lifestyle", "economic"], "spending on luxury goods"),
}

AGREE_TEMPLATES = [
    "I would vote for a proposal favoring {t}.", "I personally support {t}.",
    "I would encourage my friends to back {t}.", "Society benefits from {t}.",
    "I would sign a petition in favor of {t}.", "I would give money to a group promoting {t}.",
]
DISAGREE_TEMPLATES = [
    "I would vote against a proposal favoring {t}.", "I personally oppose {t}.",
    "I would discourage my friends from backing {t}.", "Society is harmed by {t}.",
    "I would sign a petition against {t}.", "I would give money to a group campaigning against {t}.",
]
CONTEXTS = ["", " in my town", " in my country", " this year", " even at a personal cost",
            " if asked by a stranger", " when money is tight", " during an election season",
            " if my family disagreed", " as a long-term commitment"]


def statements():
    lines = []
    for b, (tags, topic) in STATEMENT_BEHAVIORS.items():
        for ctx in CONTEXTS:
            for agree, temps in ((True, AGREE_TEMPLATES), (False, DISAGREE_TEMPLATES)):
                for t in temps[:3]:
                    s = t.format(t=topic)
                    s = s[:-1] + ctx + "."
                    lines.append({"behavior_name": b, "statement": s, "agree_means_behavior": agree, "tags": tags})
    return lines


def matrix_csv(rows, cols, cells):
    out = ["label," + ",".join(cols)]
    for r, row in zip(rows, cells):
        out.append(r + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"


def main():
    write_json("pvq_synthetic.json", pvq())
    write_json("bfi2_synthetic.json", bfi())
    write_json("ebq_synthetic.json", ebq())
    with open(os.path.join(HERE, "statements.jsonl"), "w", encoding="utf-8") as f:
        for s in statements():
            f.write(json.dumps(s, ensure_ascii=False) + "\n")
    p = 0.047
    write_json("prior_synthetic.json", {"p_none": 0.53, "p_dominant": {v: p for v in VALUES}})
    write_json("prior_skewed.json", {"p_none": 0.4, "p_dominant": {
        "power": 0.02, "achievement": 0.05, "hedonism": 0.06, "stimulation": 0.03, "self-direction": 0.1,
        "universalism": 0.09, "benevolence": 0.12, "tradition": 0.03, "conformity": 0.04, "security": 0.06}})

    cells = [[1.0] * 10 for _ in range(10)]
    for i in range(10):
        for j in range(i + 1, 10):
            cells[i][j] = cells[j][i] = math.cos(value_angle(i) - value_angle(j))
    with open(os.path.join(HERE, "human_values_circumplex.csv"), "w") as f:
        f.write(matrix_csv(VALUES, VALUES, cells))

    behaviors = list(BFI_DOMAINS) + list(EBQ_BEHAVIORS)
    vb = [[0.4 * math.cos(value_angle(i) - behavior_angle(b)) for b in behaviors] for i in range(10)]
    with open(os.path.join(HERE, "human_value_behavior.csv"), "w") as f:
        f.write(matrix_csv(VALUES, behaviors, vb))


if __name__ == "__main__":
    main()
