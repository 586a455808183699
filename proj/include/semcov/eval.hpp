#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semcov/jsonl_io.hpp"
#include "semcov/qa_items.hpp"

namespace semcov {

struct Prediction {
    std::string qid;
    std::string raw_text;
};

/// Normalized model answer. For Binary: {"yes"} or {"no"}. For MCQ/MAQ:
/// the selected candidate TEXTS (option letters are resolved against the
/// item's candidate list, so scoring is stable under letter relabeling).
/// For Open: one whitespace-normalized text. ok=false marks answers with no
/// recognizable content; they score as wrong/empty.
struct ParsedAnswer {
    bool ok = false;
    std::vector<std::string> answers;
};

ParsedAnswer parse_answer(const std::string& raw, const QAItem& item);

/// Exact-match fraction over Binary/MCQ items; preds[i] answers items[i].
/// Unparseable predictions count as wrong.
double accuracy(const std::vector<ParsedAnswer>& preds, const std::vector<QAItem>& items);

struct MaqScore {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// Macro-averaged set precision/recall/F1 over MAQ items. Per item:
/// precision |P∩G|/|P| (0 when P empty), recall |P∩G|/|G|, F1 the harmonic
/// mean (0 when both are 0).
MaqScore maq_prf1(const std::vector<ParsedAnswer>& preds, const std::vector<QAItem>& items);

/// Lowercased tokens split on non-alphanumeric runs.
std::vector<std::string> bleu_tokenize(const std::string& text);

/// Sentence BLEU-n: geometric mean of clipped i-gram precisions (i = 1..n,
/// zero counts smoothed to eps/total with eps = 1e-9) times the brevity
/// penalty exp(1 - r/c) when c < r. Hypotheses with no n-grams at any order
/// (fewer than n tokens) score 0.
double bleu_n(const std::string& hypothesis, const std::string& reference, int n);

/// One row of the grouped metric table. Metric keys: "accuracy" for
/// Binary/MCQ rows, "precision"/"recall"/"f1" for MAQ rows, "bleu2"/"bleu4"
/// for Open rows. Mixed rollup rows only carry the keys that apply.
struct EvalGroup {
    std::string level = "*";
    std::string format = "*";
    std::string source = "*";
    std::size_t count = 0;
    std::size_t unparseable = 0;
    std::size_t missing = 0;
    std::map<std::string, double> metrics;
};

struct EvalReport {
    std::vector<EvalGroup> groups;     // fine-grained (level, format, source) rows
    std::vector<EvalGroup> by_format;  // per-format rollups
    std::size_t total = 0;
    std::size_t unparseable_total = 0;
    std::size_t missing_total = 0;
    std::vector<std::string> warnings;

    Json to_json() const;
    /// Text table. `fine` prints the (level, format, source) rows, `rollup`
    /// the per-format sums; the totals line is always present.
    std::string to_table(bool fine = true, bool rollup = true) const;
};

/// Scores predictions against a benchmark: routes each item to its format's
/// metric, groups rows by (level, format, source-provenance). Every
/// prediction qid must name a benchmark item (ReferenceError otherwise,
/// listing offenders); duplicate predictions keep the last and warn; items
/// without a prediction score as empty.
EvalReport evaluate(const std::vector<Prediction>& preds, const std::vector<QAItem>& items);

std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path);

} // namespace semcov
