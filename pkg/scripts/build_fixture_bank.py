"""Regenerate the packaged fixture bank and ratings files.

Texts are authored here; the script only checks the length ordering
(beginner strictly longest, advanced strictly shortest per question),
assembles the JSON files, and writes them under src/adaptivq/data/.
"""

from __future__ import annotations

import json
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "adaptivq" / "data"

QUESTIONS = [
    {
        "id": "q-prob-mean",
        "topic_id": "probability",
        "accepted_answers": ["mean", "the mean", "average"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "Imagine you have a list of numbers, for example the test scores of "
                "everyone in a class. Suppose you add every score together and then "
                "divide that total by how many scores there are. This gives one value "
                "that summarizes the whole list. What is this summary measure called?"
            ),
            "intermediate": (
                "Suppose you add all observations in a sample together and divide the "
                "total by the number of observations. Which common measure of central "
                "tendency do you obtain this way?"
            ),
            "advanced": "Which central-tendency measure equals the sum of the observations divided by their count?",
        },
    },
    {
        "id": "q-prob-complement",
        "topic_id": "probability",
        "accepted_answers": ["0.7", ".7", "70%"],
        "original_level": "advanced",
        "variants": {
            "beginner": (
                "The weather forecast says there is a 0.3 probability of rain tomorrow. "
                "Remember that tomorrow it either rains or it does not, so the two "
                "probabilities must add up to exactly 1. Using that fact, what is the "
                "probability that it does not rain tomorrow?"
            ),
            "intermediate": (
                "The probability of rain tomorrow is 0.3. Since rain and no rain are "
                "complementary events whose probabilities sum to 1, what is the "
                "probability of no rain?"
            ),
            "advanced": "Given P(rain) = 0.3, what is the probability of the complementary event?",
        },
    },
    {
        "id": "q-prob-two-heads",
        "topic_id": "probability",
        "accepted_answers": ["0.25", ".25", "1/4", "25%"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "You flip a fair coin two times in a row. Each flip lands heads with "
                "probability one half, and the second flip does not depend on the first "
                "in any way. Multiplying the two probabilities together, what is the "
                "probability that both flips come up heads?"
            ),
            "intermediate": (
                "A fair coin is flipped twice and the flips are independent. Using the "
                "multiplication rule for independent events, what is the probability "
                "that both flips are heads?"
            ),
            "advanced": "Two independent fair coin flips: what is the probability of two heads?",
        },
    },
    {
        "id": "q-prob-posterior",
        "topic_id": "probability",
        "accepted_answers": ["posterior", "the posterior", "posterior probability"],
        "original_level": "advanced",
        "variants": {
            "beginner": (
                "In Bayesian reasoning you start with a belief about a hypothesis before "
                "seeing any data, called the prior. After you observe new evidence, you "
                "update that belief with Bayes' rule to get a new probability. What is "
                "this updated probability of the hypothesis called?"
            ),
            "intermediate": (
                "In Bayes' rule, the prior probability of a hypothesis is combined with "
                "the likelihood of observed evidence. What name is given to the updated "
                "probability that results?"
            ),
            "advanced": "In Bayesian inference, what is the updated hypothesis probability after conditioning on evidence called?",
        },
    },
    {
        "id": "q-prob-die-mean",
        "topic_id": "probability",
        "accepted_answers": ["3.5", "7/2"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "A fair six-sided die shows each of the faces 1, 2, 3, 4, 5 and 6 with "
                "equal probability. The expected value is found by adding the six faces "
                "and dividing by six, because every face is equally likely. What is the "
                "expected value of one roll?"
            ),
            "intermediate": (
                "A fair six-sided die shows each face from 1 to 6 with equal "
                "probability. Averaging the faces with equal weights, what is the "
                "expected value of a single roll?"
            ),
            "advanced": "What is the expected value of one roll of a fair six-sided die?",
        },
    },
    {
        "id": "q-reg-slope-sign",
        "topic_id": "regression",
        "accepted_answers": ["positive"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "Two variables move together: whenever one goes up, the other tends to "
                "go up as well, so their correlation is greater than zero. If you fit a "
                "simple least-squares line predicting one from the other, what sign "
                "will the fitted slope coefficient have?"
            ),
            "intermediate": (
                "Two variables have a correlation greater than zero. When you fit a "
                "simple least-squares regression of one on the other, what is the sign "
                "of the fitted slope?"
            ),
            "advanced": "Under positive correlation, what is the sign of the simple least-squares slope?",
        },
    },
    {
        "id": "q-reg-residual",
        "topic_id": "regression",
        "accepted_answers": ["residual", "the residual", "residuals"],
        "original_level": "advanced",
        "variants": {
            "beginner": (
                "A fitted regression line gives a predicted value for every data point. "
                "For one point, take its actually observed value and subtract the value "
                "the line predicts for it; the leftover amount measures how far off the "
                "prediction was. What is this leftover quantity called?"
            ),
            "intermediate": (
                "After fitting a regression model, you subtract each predicted value "
                "from its observed value to measure the prediction error per point. "
                "What is this difference called?"
            ),
            "advanced": "What is the difference between an observed value and its fitted value called?",
        },
    },
    {
        "id": "q-reg-intercept",
        "topic_id": "regression",
        "accepted_answers": ["intercept", "the intercept", "bias"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "Look at the equation of a fitted line, y equals a plus b times x. If "
                "you plug in x equal to zero, the slope term vanishes and the "
                "prediction is just the constant a, where the line crosses the y-axis. "
                "What is this constant term called?"
            ),
            "intermediate": (
                "In the fitted line y = a + b x, setting every predictor to zero leaves "
                "only the constant term a. What is this term of the model called?"
            ),
            "advanced": "In a linear model, what is the constant term at zero predictors called?",
        },
    },
    {
        "id": "q-reg-r2-perfect",
        "topic_id": "regression",
        "accepted_answers": ["1", "1.0", "one"],
        "original_level": "advanced",
        "variants": {
            "beginner": (
                "The R-squared score of a regression tells you what fraction of the "
                "variance in the target the model explains. Suppose a model predicts "
                "every single point exactly, with no error at all, so all the variance "
                "is explained. What value does R-squared take then?"
            ),
            "intermediate": (
                "R-squared measures the fraction of target variance a regression "
                "explains. If the model reproduces every observation exactly, what "
                "value does R-squared reach?"
            ),
            "advanced": "What is the R-squared of a regression with zero residual error?",
        },
    },
    {
        "id": "q-reg-overfit",
        "topic_id": "regression",
        "accepted_answers": ["overfitting", "overfit"],
        "original_level": "intermediate",
        "variants": {
            "beginner": (
                "A very flexible model is trained until it memorizes the noise in its "
                "training data. It then scores almost perfectly on the data it was "
                "trained on but performs badly on fresh unseen data. What is the name "
                "for this failure mode of a model?"
            ),
            "intermediate": (
                "A model fits its training data almost perfectly yet generalizes poorly "
                "to unseen data because it has captured noise. What is this failure "
                "mode called?"
            ),
            "advanced": "What is it called when a model fits training noise and generalizes poorly?",
        },
    },
]

RATERS = ["r1", "r2", "r3"]

# Integer/half-point scores on the 0-5 scales, varied per rater and question.
DIFFICULTY_BASE = {"beginner": 1.5, "intermediate": 2.5, "advanced": 4.0}
DIFFICULTY_WOBBLE = [0.0, 0.5, -0.5, 0.5, 0.0, -0.5, 0.5, 0.0, 0.0, -0.5]
RATER_SHIFT = {"r1": 0.0, "r2": 0.5, "r3": -0.5}
FLUENCY_CYCLE = [4.5, 5.0, 4.5, 4.0, 5.0, 4.5, 5.0, 4.5, 4.0, 5.0]
MEANING_CYCLE = [5.0, 4.5, 5.0, 5.0, 4.5, 5.0, 4.5, 5.0, 5.0, 4.5]


def build_ratings() -> list[dict]:
    ratings = []
    for qi, question in enumerate(QUESTIONS):
        for level in ("beginner", "intermediate", "advanced"):
            for ri, rater in enumerate(RATERS):
                difficulty = DIFFICULTY_BASE[level] + DIFFICULTY_WOBBLE[qi] + RATER_SHIFT[rater]
                difficulty = min(5.0, max(0.0, difficulty))
                ratings.append(
                    {
                        "question_id": question["id"],
                        "level": level,
                        "rater_id": rater,
                        "difficulty": difficulty,
                        "fluency": FLUENCY_CYCLE[(qi + ri) % 10],
                        "meaning_preservation": MEANING_CYCLE[(qi + 2 * ri) % 10],
                    }
                )
    return ratings


def main() -> None:
    for q in QUESTIONS:
        counts = {lv: len(text.split()) for lv, text in q["variants"].items()}
        assert counts["beginner"] > counts["intermediate"] > counts["advanced"], (
            q["id"],
            counts,
        )
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    (DATA_DIR / "bank.json").write_text(
        json.dumps({"questions": QUESTIONS}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (DATA_DIR / "ratings.json").write_text(
        json.dumps(build_ratings(), indent=2) + "\n", encoding="utf-8"
    )
    by_level = {"beginner": [], "intermediate": [], "advanced": []}
    for q in QUESTIONS:
        for lv, text in q["variants"].items():
            by_level[lv].append(len(text.split()))
    for lv, counts in by_level.items():
        print(f"{lv}: mean word count {sum(counts) / len(counts):.1f} ({min(counts)}-{max(counts)})")
    print(f"wrote {DATA_DIR / 'bank.json'} and {DATA_DIR / 'ratings.json'}")


if __name__ == "__main__":
    main()
