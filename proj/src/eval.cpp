#include "semcov/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "semcov/errors.hpp"

namespace semcov {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool gap = true;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            gap = true;
        } else {
            if (gap && !out.empty()) out += ' ';
            gap = false;
            out += c;
        }
    }
    return out;
}

// The word immediately after position i (skipping spaces), letters only.
std::string following_word(const std::string& s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::string w;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) w += s[i++];
    return w;
}

// Standalone option letters (indices into the candidate list), in order of
// appearance, deduplicated. A letter counts when neither neighbor is a word
// character. An 'a'/'A' directly before a real word reads as the article,
// not an option — unless that word is "and"/"or" (list context) or a single
// letter (option run like "a b c").
std::vector<std::size_t> extract_letters(const std::string& raw, std::size_t n_candidates) {
    std::vector<std::size_t> out;
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        std::size_t idx;
        if (c >= 'A' && c <= 'H') {
            idx = static_cast<std::size_t>(c - 'A');
        } else if (c >= 'a' && c <= 'h') {
            idx = static_cast<std::size_t>(c - 'a');
        } else {
            continue;
        }
        if (idx >= n_candidates) continue;
        if (i > 0 && is_word_char(raw[i - 1])) continue;
        if (i + 1 < raw.size() && is_word_char(raw[i + 1])) continue;
        if (c == 'a' || c == 'A') {
            const std::string next = lower(following_word(raw, i + 1));
            if (next.size() >= 2 && next != "and" && next != "or") continue;
        }
        if (seen.insert(idx).second) out.push_back(idx);
    }
    return out;
}

} // namespace

ParsedAnswer parse_answer(const std::string& raw, const QAItem& item) {
    ParsedAnswer p;
    switch (item.format) {
        case QaFormat::Binary: {
            std::string tok;
            auto check = [&]() -> bool {
                const std::string t = lower(tok);
                if (t == "yes") { p.ok = true; p.answers = {"yes"}; return true; }
                if (t == "no") { p.ok = true; p.answers = {"no"}; return true; }
                tok.clear();
                return false;
            };
            for (char c : raw) {
                if (std::isalpha(static_cast<unsigned char>(c))) {
                    tok += c;
                } else if (!tok.empty() && check()) {
                    return p;
                }
            }
            if (!tok.empty()) check();
            return p;
        }
        case QaFormat::MCQ: {
            const auto letters = extract_letters(raw, item.candidates.size());
            if (!letters.empty()) {
                p.ok = true;
                p.answers = {item.candidates[letters.front()]};
            }
            return p;
        }
        case QaFormat::MAQ: {
            auto letters = extract_letters(raw, item.candidates.size());
            if (!letters.empty()) {
                std::sort(letters.begin(), letters.end());
                p.ok = true;
                for (std::size_t idx : letters) p.answers.push_back(item.candidates[idx]);
            }
            return p;
        }
        case QaFormat::Open:
            p.ok = true;
            p.answers = {normalize_ws(raw)};
            return p;
    }
    return p;
}

double accuracy(const std::vector<ParsedAnswer>& preds, const std::vector<QAItem>& items) {
    if (items.empty()) throw ValidationError("accuracy: empty item set");
    if (preds.size() != items.size())
        throw ValidationError("accuracy: prediction/item count mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].format != QaFormat::Binary && items[i].format != QaFormat::MCQ)
            throw ValidationError("accuracy applies to Binary/MCQ items only");
        if (!preds[i].ok) continue;
        const std::set<std::string> got(preds[i].answers.begin(), preds[i].answers.end());
        const std::set<std::string> want(items[i].gold.begin(), items[i].gold.end());
        if (got == want) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(items.size());
}

MaqScore maq_prf1(const std::vector<ParsedAnswer>& preds, const std::vector<QAItem>& items) {
    if (items.empty()) throw ValidationError("maq_prf1: empty item set");
    if (preds.size() != items.size())
        throw ValidationError("maq_prf1: prediction/item count mismatch");
    MaqScore total;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].format != QaFormat::MAQ)
            throw ValidationError("maq_prf1 applies to MAQ items only");
        std::set<std::string> pred;
        if (preds[i].ok) pred.insert(preds[i].answers.begin(), preds[i].answers.end());
        const std::set<std::string> gold(items[i].gold.begin(), items[i].gold.end());
        std::size_t inter = 0;
        for (const auto& x : pred) inter += gold.count(x);
        const double prec = pred.empty() ? 0.0
                                         : static_cast<double>(inter) / static_cast<double>(pred.size());
        const double rec = static_cast<double>(inter) / static_cast<double>(gold.size());
        const double f1 = (prec + rec) == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
        total.precision += prec;
        total.recall += rec;
        total.f1 += f1;
    }
    const double n = static_cast<double>(items.size());
    return {total.recall / n, total.precision / n, total.f1 / n};
}

std::vector<std::string> bleu_tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

double bleu_n(const std::string& hypothesis, const std::string& reference, int n) {
    if (n < 1 || n > 9) throw ValidationError("bleu_n: order must lie in [1,9]");
    constexpr double eps = 1e-9;
    const auto hyp = bleu_tokenize(hypothesis);
    const auto ref = bleu_tokenize(reference);
    if (hyp.empty()) return 0.0;

    double log_sum = 0.0;
    for (int order = 1; order <= n; ++order) {
        const std::size_t k = static_cast<std::size_t>(order);
        if (hyp.size() < k) return 0.0; // no k-grams at all: score floor

        auto count_grams = [k](const std::vector<std::string>& toks) {
            std::unordered_map<std::string, int> counts;
            if (toks.size() < k) return counts;
            for (std::size_t i = 0; i + k <= toks.size(); ++i) {
                std::string key;
                for (std::size_t j = 0; j < k; ++j) {
                    key += toks[i + j];
                    key += '\x1f';
                }
                ++counts[key];
            }
            return counts;
        };
        const auto hyp_counts = count_grams(hyp);
        const auto ref_counts = count_grams(ref);

        double total = 0.0, clipped = 0.0;
        for (const auto& [gram, count] : hyp_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        const double p = clipped > 0.0 ? clipped / total : eps / total;
        log_sum += std::log(p);
    }

    double bp = 1.0;
    if (hyp.size() < ref.size())
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
    return bp * std::exp(log_sum / n);
}

namespace {

int level_rank(const std::string& l) {
    const std::array<const char*, 4> order{"KM", "KU", "KA", "KC"};
    for (int i = 0; i < 4; ++i)
        if (l == order[static_cast<std::size_t>(i)]) return i;
    return 4;
}

int format_rank(const std::string& f) {
    const std::array<const char*, 4> order{"Binary", "MCQ", "MAQ", "Open"};
    for (int i = 0; i < 4; ++i)
        if (f == order[static_cast<std::size_t>(i)]) return i;
    return 4;
}

// Metrics for one pool of same-format items.
void fill_metrics(EvalGroup& g, const QaFormat format,
                  const std::vector<ParsedAnswer>& preds, const std::vector<QAItem>& items) {
    switch (format) {
        case QaFormat::Binary:
        case QaFormat::MCQ:
            g.metrics["accuracy"] = accuracy(preds, items);
            break;
        case QaFormat::MAQ: {
            const MaqScore s = maq_prf1(preds, items);
            g.metrics["recall"] = s.recall;
            g.metrics["precision"] = s.precision;
            g.metrics["f1"] = s.f1;
            break;
        }
        case QaFormat::Open: {
            double b2 = 0.0, b4 = 0.0;
            for (std::size_t i = 0; i < items.size(); ++i) {
                const std::string& hyp = preds[i].answers.empty() ? std::string() : preds[i].answers[0];
                b2 += bleu_n(hyp, items[i].gold[0], 2);
                b4 += bleu_n(hyp, items[i].gold[0], 4);
            }
            g.metrics["bleu2"] = b2 / static_cast<double>(items.size());
            g.metrics["bleu4"] = b4 / static_cast<double>(items.size());
            break;
        }
    }
}

} // namespace

EvalReport evaluate(const std::vector<Prediction>& preds, const std::vector<QAItem>& items) {
    if (items.empty()) throw ValidationError("evaluate: empty benchmark");

    std::unordered_map<std::string, std::size_t> by_qid;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!by_qid.emplace(items[i].qid, i).second)
            throw ValidationError("evaluate: duplicate benchmark qid '" + items[i].qid + "'");
    }

    EvalReport report;

    std::unordered_map<std::string, std::string> answer_of;
    std::vector<std::string> unknown;
    for (const auto& p : preds) {
        if (!by_qid.count(p.qid)) {
            unknown.push_back(p.qid);
            continue;
        }
        if (answer_of.count(p.qid))
            report.warnings.push_back("duplicate prediction for qid '" + p.qid + "' (last wins)");
        answer_of[p.qid] = p.raw_text;
    }
    if (!unknown.empty()) {
        std::string msg = "predictions name unknown qids:";
        for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) msg += " '" + unknown[i] + "'";
        if (unknown.size() > 10) msg += " (and " + std::to_string(unknown.size() - 10) + " more)";
        throw ReferenceError(msg);
    }

    struct Pool {
        QaFormat format;
        std::vector<ParsedAnswer> preds;
        std::vector<QAItem> items;
        std::size_t unparseable = 0;
        std::size_t missing = 0;
    };
    std::map<std::array<std::string, 3>, Pool> fine;   // (level, format, source)
    std::map<std::string, Pool> per_format;

    report.total = items.size();
    for (const auto& item : items) {
        const auto it = answer_of.find(item.qid);
        const bool have = it != answer_of.end();
        const ParsedAnswer parsed = parse_answer(have ? it->second : std::string(), item);
        const bool unparseable = have && !parsed.ok;
        const bool missing = !have;
        if (unparseable) ++report.unparseable_total;
        if (missing) ++report.missing_total;

        const std::array<std::string, 3> key{level_name(item.level), format_name(item.format),
                                             provenance_name(item.provenance)};
        for (Pool* pool : {&fine[key], &per_format[key[1]]}) {
            pool->format = item.format;
            pool->preds.push_back(parsed);
            pool->items.push_back(item);
            if (unparseable) ++pool->unparseable;
            if (missing) ++pool->missing;
        }
    }

    for (const auto& [key, pool] : fine) {
        EvalGroup g;
        g.level = key[0];
        g.format = key[1];
        g.source = key[2];
        g.count = pool.items.size();
        g.unparseable = pool.unparseable;
        g.missing = pool.missing;
        fill_metrics(g, pool.format, pool.preds, pool.items);
        report.groups.push_back(std::move(g));
    }
    std::sort(report.groups.begin(), report.groups.end(),
              [](const EvalGroup& a, const EvalGroup& b) {
                  const auto ka = std::tuple(level_rank(a.level), format_rank(a.format), a.source);
                  const auto kb = std::tuple(level_rank(b.level), format_rank(b.format), b.source);
                  return ka < kb;
              });

    for (const auto& [fmt, pool] : per_format) {
        EvalGroup g;
        g.format = fmt;
        g.count = pool.items.size();
        g.unparseable = pool.unparseable;
        g.missing = pool.missing;
        fill_metrics(g, pool.format, pool.preds, pool.items);
        report.by_format.push_back(std::move(g));
    }
    std::sort(report.by_format.begin(), report.by_format.end(),
              [](const EvalGroup& a, const EvalGroup& b) {
                  return format_rank(a.format) < format_rank(b.format);
              });

    return report;
}

namespace {

Json group_json(const EvalGroup& g) {
    Json j;
    j["level"] = g.level;
    j["format"] = g.format;
    j["source"] = g.source;
    j["count"] = g.count;
    j["unparseable"] = g.unparseable;
    j["missing"] = g.missing;
    Json m;
    for (const auto& [k, v] : g.metrics) m[k] = v;
    j["metrics"] = m;
    return j;
}

} // namespace

Json EvalReport::to_json() const {
    Json j;
    Json rows = Json::array();
    for (const auto& g : groups) rows.push_back(group_json(g));
    j["groups"] = rows;
    Json fmts = Json::array();
    for (const auto& g : by_format) fmts.push_back(group_json(g));
    j["by_format"] = fmts;
    j["total"] = total;
    j["unparseable"] = unparseable_total;
    j["missing"] = missing_total;
    j["warnings"] = warnings;
    return j;
}

std::string EvalReport::to_table(bool fine, bool rollup) const {
    const std::array<const char*, 6> metric_cols{"accuracy", "precision", "recall",
                                                 "f1", "bleu2", "bleu4"};
    std::ostringstream out;
    auto row = [&](const std::string& level, const std::string& format, const std::string& source,
                   const std::string& count, const std::vector<std::string>& metrics,
                   const std::string& unparse, const std::string& missing) {
        out << std::left << std::setw(6) << level << std::setw(8) << format << std::setw(15)
            << source << std::right << std::setw(7) << count;
        for (const auto& m : metrics) out << std::setw(11) << m;
        out << std::setw(9) << unparse << std::setw(9) << missing << '\n';
    };
    auto fmt_metrics = [&](const EvalGroup& g) {
        std::vector<std::string> cells;
        for (const char* key : metric_cols) {
            auto it = g.metrics.find(key);
            if (it == g.metrics.end()) {
                cells.push_back("-");
            } else {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(4) << it->second;
                cells.push_back(cell.str());
            }
        }
        return cells;
    };

    if (fine) {
        row("level", "format", "source", "count",
            {metric_cols.begin(), metric_cols.end()}, "unparse", "missing");
        for (const auto& g : groups)
            row(g.level, g.format, g.source, std::to_string(g.count), fmt_metrics(g),
                std::to_string(g.unparseable), std::to_string(g.missing));
        out << '\n';
    }
    if (rollup) {
        row("", "format", "(all)", "count",
            {metric_cols.begin(), metric_cols.end()}, "unparse", "missing");
        for (const auto& g : by_format)
            row("", g.format, "*", std::to_string(g.count), fmt_metrics(g),
                std::to_string(g.unparseable), std::to_string(g.missing));
        out << '\n';
    }
    out << "items " << total << ", unparseable " << unparseable_total << ", missing "
        << missing_total << '\n';
    return out.str();
}

std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path) {
    std::vector<Prediction> preds;
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        if (!j.contains("qid") || !j.contains("prediction"))
            throw ValidationError(path.filename().string() + " line " + std::to_string(lineno) +
                                  ": prediction records need qid and prediction fields");
        preds.push_back({j.at("qid").get<std::string>(), j.at("prediction").get<std::string>()});
    });
    return preds;
}

} // namespace semcov
