#include "semcov/curator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "semcov/compactness.hpp"
#include "semcov/errors.hpp"

namespace semcov {

namespace {

const char* mode_name(ThresholdMode m) {
    return m == ThresholdMode::Percentile ? "percentile" : "literal";
}

ThresholdMode parse_mode(const std::string& s, const std::string& where) {
    if (s == "percentile") return ThresholdMode::Percentile;
    if (s == "literal") return ThresholdMode::Literal;
    throw ValidationError(where + ": unknown threshold_mode '" + s +
                          "' (expected percentile or literal)");
}

} // namespace

void CuratorConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ValidationError("config: h must be positive and finite");
    if (!(t_c >= -1.0 && t_c <= 1.0))
        throw ValidationError("config: t_c must lie in [-1, 1]");
    if (!(t_d >= 0.0 && t_d <= 1.0))
        throw ValidationError("config: t_d must lie in [0, 1]");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw ValidationError("config: epsilon must be finite and >= 0");
    if (max_rounds < 1) throw ValidationError("config: max_rounds must be >= 1");
    if (batch_strategy == BatchStrategy::FixedSize && batch_size < 1)
        throw ValidationError("config: fixed-size batching needs batch_size >= 1");
}

Json CuratorConfig::to_json() const {
    Json j;
    j["h"] = h;
    j["t_c"] = t_c;
    j["t_d"] = t_d;
    j["epsilon"] = epsilon;
    j["max_rounds"] = max_rounds;
    j["seed"] = seed;
    j["batch_strategy"] = strategy_name(batch_strategy);
    j["batch_size"] = batch_size;
    j["threshold_mode"] = mode_name(threshold_mode);
    return j;
}

CuratorConfig CuratorConfig::from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": config must be a JSON object");
    CuratorConfig c;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "h") c.h = value.get<double>();
            else if (key == "t_c") c.t_c = value.get<double>();
            else if (key == "t_d") c.t_d = value.get<double>();
            else if (key == "epsilon") c.epsilon = value.get<double>();
            else if (key == "max_rounds") c.max_rounds = value.get<std::size_t>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "batch_strategy") c.batch_strategy = parse_strategy(value.get<std::string>());
            else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
            else if (key == "threshold_mode") c.threshold_mode = parse_mode(value.get<std::string>(), where);
            else throw ValidationError(where + ": unknown config key '" + key + "'");
        } catch (const Json::exception& e) {
            throw ValidationError(where + ": bad value for '" + key + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

CuratorConfig CuratorConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j, path.filename().string());
}

Json RoundRecord::to_json() const {
    Json j;
    j["round"] = round;
    j["phase"] = phase;
    j["batch_id"] = batch_id;
    j["accepted"] = accepted;
    j["forced"] = forced;
    if (r.has_value())
        j["r"] = *r;
    else
        j["r"] = nullptr;
    j["gap_before"] = gap_before;
    j["gap_after"] = gap_after;
    j["corpus_size"] = corpus_size;
    j["question_size"] = question_size;
    j["new_items"] = new_items;
    return j;
}

RoundRecord RoundRecord::from_json(const Json& j, const std::string& where) {
    for (const char* key : {"round", "phase", "batch_id", "accepted", "forced", "r",
                            "gap_before", "gap_after", "corpus_size", "question_size",
                            "new_items"}) {
        if (!j.contains(key))
            throw ValidationError(where + ": round record lacks field '" + std::string(key) + "'");
    }
    RoundRecord rec;
    try {
        rec.round = j.at("round").get<std::size_t>();
        rec.phase = j.at("phase").get<std::string>();
        rec.batch_id = j.at("batch_id").get<std::string>();
        rec.accepted = j.at("accepted").get<bool>();
        rec.forced = j.at("forced").get<bool>();
        if (!j.at("r").is_null()) rec.r = j.at("r").get<double>();
        rec.gap_before = j.at("gap_before").get<std::size_t>();
        rec.gap_after = j.at("gap_after").get<std::size_t>();
        rec.corpus_size = j.at("corpus_size").get<std::size_t>();
        rec.question_size = j.at("question_size").get<std::size_t>();
        rec.new_items = j.at("new_items").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw ValidationError(where + ": bad round record: " + e.what());
    }
    return rec;
}

std::string CurationTrace::to_jsonl() const {
    std::string out;
    for (const auto& rec : rounds) {
        out += rec.to_json().dump();
        out += '\n';
    }
    Json tail;
    tail["terminated_reason"] = terminated_reason;
    tail["warnings"] = warnings;
    out += tail.dump();
    out += '\n';
    return out;
}

CurationTrace CurationTrace::from_jsonl(const std::filesystem::path& path) {
    CurationTrace trace;
    bool saw_tail = false;
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        const std::string where = path.filename().string() + " line " + std::to_string(lineno);
        if (j.contains("terminated_reason")) {
            if (saw_tail) throw ValidationError(where + ": duplicate terminal record");
            saw_tail = true;
            trace.terminated_reason = j.at("terminated_reason").get<std::string>();
            if (j.contains("warnings"))
                trace.warnings = j.at("warnings").get<std::vector<std::string>>();
            return;
        }
        if (saw_tail) throw ValidationError(where + ": round record after the terminal record");
        trace.rounds.push_back(RoundRecord::from_json(j, where));
    });
    if (!saw_tail) throw ValidationError(path.string() + ": trace lacks a terminal record");
    return trace;
}

// --- corpus expansion --------------------------------------------------------

namespace {

// Corpus gap against the pool, measured at every pool point with slack
// epsilon. An empty corpus means everything is a gap.
GapSet corpus_gap(const Dataset& pool, const DensityField& pool_field,
                  const KdeAccumulator& corpus_acc, double epsilon) {
    GapSet g;
    g.threshold_used = epsilon;
    if (corpus_acc.sample_count() == 0) {
        for (const auto& rec : pool.records()) {
            g.point_ids.push_back(rec.id);
            g.deltas.push_back(std::numeric_limits<double>::infinity());
        }
        return g;
    }
    const DensityField corpus_field = corpus_acc.field();
    return gap_points(log_density_ratio(pool_field, corpus_field), epsilon);
}

} // namespace

ExpandResult expand_corpus(const Dataset& pool, const BatchPartition& partition,
                           const CuratorConfig& config) {
    config.validate();
    if (pool.empty()) throw ValidationError("expand_corpus: empty reference pool");
    if (partition.batches.empty()) throw ValidationError("expand_corpus: empty partition");
    std::size_t covered = 0;
    for (const auto& b : partition.batches) covered += b.size();
    if (covered != pool.size())
        throw ValidationError("expand_corpus: partition does not cover the pool (" +
                              std::to_string(covered) + " ids for " +
                              std::to_string(pool.size()) + " records)");

    const KdeParams params{config.h};
    const std::size_t n_batches = partition.batches.size();
    const std::size_t round_cap = std::min(config.max_rounds, 2 * n_batches);

    ExpandResult res;
    res.corpus = Dataset("corpus", DatasetRole::Corpus, pool.dim());

    KdeAccumulator pool_acc(pool, params);
    pool_acc.add_samples(pool);
    const DensityField pool_field = pool_acc.field();
    KdeAccumulator corpus_acc(pool, params);

    GapSet gap = corpus_gap(pool, pool_field, corpus_acc, config.epsilon);
    std::size_t round = 0;

    // One admission round; in the completion pass the gate runs first and a
    // refusal is overridden (forced).
    auto propose = [&](std::size_t batch_idx, bool completion) {
        const Dataset batch =
            pool.subset(partition.batches[batch_idx], partition.labels[batch_idx]);
        const AdmissionDecision decision = admit_batch(batch, res.corpus, config.t_c, params);
        RoundRecord rec;
        rec.round = ++round;
        rec.phase = "corpus";
        rec.batch_id = partition.labels[batch_idx];
        rec.r = decision.r;
        rec.gap_before = gap.size();
        rec.accepted = decision.accepted || completion;
        rec.forced = completion && !decision.accepted;
        if (rec.accepted) {
            for (const auto& r : batch.records()) res.corpus.add(r);
            corpus_acc.add_samples(batch);
            gap = corpus_gap(pool, pool_field, corpus_acc, config.epsilon);
        }
        rec.gap_after = gap.size();
        rec.corpus_size = res.corpus.size();
        res.trace.rounds.push_back(rec);
        return rec.accepted;
    };

    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < n_batches; ++i) {
        if (round >= round_cap) {
            res.trace.terminated_reason = "max_rounds";
            return res;
        }
        if (!propose(i, false)) rejected.push_back(i);
    }

    // Completion pass: re-propose rejected batches, gap-richest first, until
    // the gap closes or nothing is left. Idle when the gap is already closed.
    while (!gap.empty() && !rejected.empty()) {
        if (round >= round_cap) {
            res.trace.terminated_reason = "max_rounds";
            return res;
        }
        std::size_t best = 0;
        std::size_t best_count = 0;
        for (std::size_t k = 0; k < rejected.size(); ++k) {
            std::size_t count = 0;
            for (const auto& id : partition.batches[rejected[k]])
                if (gap.contains(id)) ++count;
            if (k == 0 || count > best_count) {
                best = k;
                best_count = count;
            }
        }
        const std::size_t batch_idx = rejected[best];
        rejected.erase(rejected.begin() + static_cast<std::ptrdiff_t>(best));
        propose(batch_idx, true);
    }

    res.trace.terminated_reason = gap.empty() ? "gap_closed" : "exhausted";
    return res;
}

// --- QA rounds ---------------------------------------------------------------

QaRoundResult qa_round(const Dataset& corpus, const Dataset& questions,
                       const CuratorConfig& config, QaGenerator& generator,
                       QuestionEmbedder& embedder) {
    config.validate();
    if (corpus.empty()) throw ValidationError("qa_round: empty corpus");
    const KdeParams params{config.h};

    QaRoundResult res;
    res.questions = questions;
    res.record.phase = "qa";
    res.record.batch_id = generator.name();
    res.record.corpus_size = corpus.size();

    std::vector<GapPointInfo> gap_infos;
    if (questions.empty()) {
        // bootstrap: generate over the whole corpus
        res.record.batch_id = generator.name() + ":bootstrap";
        for (const auto& rec : corpus.records())
            gap_infos.push_back({rec.id, rec.source, rec.text.value_or("")});
    } else {
        const GapSet gap = select_gap(corpus, questions, params, config.t_d, config.epsilon,
                                      config.threshold_mode);
        for (const auto& id : gap.point_ids) {
            const Dataset& holder = corpus.contains(id) ? corpus : questions;
            const EmbeddingRecord& rec = holder.at(holder.index_of(id));
            gap_infos.push_back({rec.id, rec.source, rec.text.value_or("")});
        }
    }
    res.record.gap_before = gap_infos.size();

    if (gap_infos.empty()) {
        res.record.question_size = res.questions.size();
        return res; // no gap, no-op round
    }

    const std::vector<QAItem> produced = generator.generate(gap_infos, res.warnings);

    std::set<std::string> gap_ids;
    for (const auto& g : gap_infos) gap_ids.insert(g.id);
    std::vector<QAItem> kept;
    for (const auto& item : produced) {
        const bool anchored = std::any_of(item.source_ids.begin(), item.source_ids.end(),
                                          [&](const std::string& s) { return gap_ids.count(s) > 0; });
        if (!anchored) {
            res.warnings.push_back("item '" + item.qid + "' references no gap point; dropped");
            continue;
        }
        try {
            validate_item(item);
        } catch (const ValidationError& e) {
            res.warnings.push_back("item '" + item.qid + "' is invalid (" + e.what() +
                                   "); dropped");
            continue;
        }
        kept.push_back(item);
    }

    if (!kept.empty()) {
        const auto vectors = embedder.embed(kept, corpus);
        if (vectors.size() != kept.size())
            throw HookError("embedder '" + embedder.name() + "' returned " +
                            std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(kept.size()) + " items");
        for (std::size_t i = 0; i < kept.size(); ++i) {
            EmbeddingRecord rec;
            rec.id = kept[i].qid;
            rec.source = provenance_name(kept[i].provenance);
            rec.text = kept[i].question;
            rec.vector = vectors[i];
            res.questions.add(rec, "item '" + kept[i].qid + "'");
        }
        res.record.accepted = true;
    }
    res.new_items = std::move(kept);
    res.record.new_items = res.new_items.size();
    res.record.question_size = res.questions.size();
    res.record.gap_after = res.questions.empty()
                               ? res.record.gap_before
                               : select_gap(corpus, res.questions, params, config.t_d,
                                            config.epsilon, config.threshold_mode)
                                     .size();
    return res;
}

InjectResult inject_user_interest(const Dataset& questions, std::vector<QAItem> interest_items,
                                  QuestionEmbedder& embedder, const Dataset& corpus) {
    InjectResult res;
    res.questions = questions;
    for (auto& item : interest_items) {
        if (item.question.empty())
            throw ValidationError("interest item '" + item.qid + "' has no question text");
        item.provenance = Provenance::UserInterest;
        validate_item(item);
    }
    if (interest_items.empty()) return res;

    const auto vectors = embedder.embed(interest_items, corpus);
    if (vectors.size() != interest_items.size())
        throw HookError("embedder '" + embedder.name() + "' returned " +
                        std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(interest_items.size()) + " items");
    for (std::size_t i = 0; i < interest_items.size(); ++i) {
        EmbeddingRecord rec;
        rec.id = interest_items[i].qid;
        rec.source = provenance_name(Provenance::UserInterest);
        rec.text = interest_items[i].question;
        rec.vector = vectors[i];
        res.questions.add(rec, "interest item '" + interest_items[i].qid + "'");
    }
    res.items = std::move(interest_items);
    return res;
}

PipelineResult run_qa_phase(const Dataset& corpus, const std::vector<QAItem>& interest_items,
                            const CuratorConfig& config, QaGenerator& generator,
                            QuestionEmbedder& embedder) {
    config.validate();
    PipelineResult res;
    res.corpus = corpus;
    res.questions = Dataset("questions", DatasetRole::Questions, corpus.dim());

    std::string reason = "max_rounds";
    for (std::size_t k = 0; k < config.max_rounds; ++k) {
        QaRoundResult r = qa_round(res.corpus, res.questions, config, generator, embedder);
        r.record.round = res.trace.rounds.size() + 1;
        res.trace.rounds.push_back(r.record);
        for (auto& w : r.warnings) res.trace.warnings.push_back(std::move(w));
        res.questions = std::move(r.questions);
        for (auto& item : r.new_items) res.qa_items.push_back(std::move(item));
        if (res.trace.rounds.back().gap_after == 0) {
            reason = "gap_closed";
            break;
        }
        if (res.trace.rounds.back().new_items == 0) {
            reason = "exhausted"; // open gap but the generator has nothing left
            break;
        }
    }
    res.trace.terminated_reason = reason;

    if (!interest_items.empty()) {
        const KdeParams params{config.h};
        RoundRecord rec;
        rec.phase = "interest";
        rec.batch_id = "user_interest";
        rec.gap_before = res.questions.empty()
                             ? res.corpus.size()
                             : select_gap(res.corpus, res.questions, params, config.t_d,
                                          config.epsilon, config.threshold_mode)
                                   .size();
        InjectResult inj = inject_user_interest(res.questions, interest_items, embedder, res.corpus);
        res.questions = std::move(inj.questions);
        rec.round = res.trace.rounds.size() + 1;
        rec.accepted = true;
        rec.new_items = inj.items.size();
        rec.corpus_size = res.corpus.size();
        rec.question_size = res.questions.size();
        rec.gap_after = select_gap(res.corpus, res.questions, params, config.t_d, config.epsilon,
                                   config.threshold_mode)
                            .size();
        res.trace.rounds.push_back(rec);
        for (auto& item : inj.items) res.qa_items.push_back(std::move(item));
    }
    return res;
}

PipelineResult run_pipeline(const Dataset& pool, const std::vector<QAItem>& interest_items,
                            const CuratorConfig& config, QaGenerator& generator,
                            QuestionEmbedder& embedder) {
    config.validate();
    const BatchPartition partition =
        partition_batches(pool, config.batch_strategy, config.batch_size, config.seed);
    ExpandResult expanded = expand_corpus(pool, partition, config);

    PipelineResult qa = run_qa_phase(expanded.corpus, interest_items, config, generator, embedder);

    PipelineResult res;
    res.corpus = std::move(qa.corpus);
    res.questions = std::move(qa.questions);
    res.qa_items = std::move(qa.qa_items);
    res.trace = std::move(expanded.trace);
    const std::size_t offset = res.trace.rounds.size();
    for (auto& rec : qa.trace.rounds) {
        rec.round += offset;
        res.trace.rounds.push_back(std::move(rec));
    }
    for (auto& w : qa.trace.warnings) res.trace.warnings.push_back(std::move(w));
    res.trace.terminated_reason = std::move(qa.trace.terminated_reason);
    return res;
}

} // namespace semcov
