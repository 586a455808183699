#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semcov/dataset.hpp"
#include "semcov/density.hpp"
#include "semcov/jsonl_io.hpp"
#include "semcov/qa_items.hpp"

namespace semcov {

/// Knobs of the curation loops. h drives every density estimate; t_c gates
/// batch admission (accept when r < t_c); t_d sets the fill fraction per QA
/// round; epsilon is the log-density slack below which a point does not count
/// as a gap.
struct CuratorConfig {
    double h = 5.0;
    double t_c = 0.05;
    double t_d = 0.6;
    double epsilon = 0.05;
    std::size_t max_rounds = 32;
    std::uint64_t seed = 0;
    BatchStrategy batch_strategy = BatchStrategy::BySource;
    std::size_t batch_size = 0; // FixedSize only
    ThresholdMode threshold_mode = ThresholdMode::Percentile;

    /// Throws ValidationError on out-of-range values.
    void validate() const;

    Json to_json() const;
    static CuratorConfig from_json(const Json& j, const std::string& where = "config");
    static CuratorConfig from_json_file(const std::filesystem::path& path);
};

/// One audit line of the curation loop. Corpus rounds track an admission
/// (r, accepted, forced); QA rounds track generation (new_items); the
/// interest round tracks unconditional injection. Gap counts are measured
/// against the phase's own reference pool.
struct RoundRecord {
    std::size_t round = 0; // 1-based over the whole trace
    std::string phase;     // "corpus" | "qa" | "interest"
    std::string batch_id;
    bool accepted = false;
    bool forced = false;
    std::optional<double> r; // corpus rounds only
    std::size_t gap_before = 0;
    std::size_t gap_after = 0;
    std::size_t corpus_size = 0;   // |C| after the round
    std::size_t question_size = 0; // |Q| after the round
    std::size_t new_items = 0;     // QA items added this round

    bool operator==(const RoundRecord&) const = default;

    Json to_json() const;
    static RoundRecord from_json(const Json& j, const std::string& where);
};

/// Full audit log: one JSONL line per round plus a terminal line carrying the
/// stop reason and any warnings. No timestamps anywhere, so identical runs
/// serialize byte-identically.
struct CurationTrace {
    std::vector<RoundRecord> rounds;
    std::string terminated_reason; // "exhausted" | "gap_closed" | "max_rounds"
    std::vector<std::string> warnings;

    std::string to_jsonl() const;
    static CurationTrace from_jsonl(const std::filesystem::path& path);
};

/// A gap point handed to the QA generator: the under-covered record's id
/// plus whatever source/text context the holding dataset carries.
struct GapPointInfo {
    std::string id;
    std::string source;
    std::string text;

    bool operator==(const GapPointInfo&) const = default;
};

/// QA generation hook. Implementations must emit valid QAItems whose
/// source_ids reference at least one requested gap point, with qids unique
/// across repeated calls. Failures raise HookError.
class QaGenerator {
public:
    virtual ~QaGenerator() = default;
    virtual std::string name() const = 0;
    virtual std::vector<QAItem> generate(const std::vector<GapPointInfo>& gap_points,
                                         std::vector<std::string>& warnings) = 0;
};

/// Embedding hook for question texts. Receives the full items plus the
/// corpus so implementations may either encode the question text (remote
/// encoder) or anchor questions at their source records (self-contained
/// demos). Must return one corpus-dimension vector per item, in order.
class QuestionEmbedder {
public:
    virtual ~QuestionEmbedder() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<QAItem>& items,
                                                   const Dataset& corpus) = 0;
};

struct ExpandResult {
    Dataset corpus;
    CurationTrace trace;
};

/// Grows a corpus from the reference pool batch by batch. Each batch passes
/// through the density-correlation gate; after every admission the gap set
/// of the corpus against the pool (slack epsilon) is re-measured. Every batch
/// is proposed once; if gaps remain, rejected batches are re-proposed once in
/// descending contained-gap order, force-admitted when the gate still says
/// no. Halts within min(max_rounds, 2 * batch count) rounds.
ExpandResult expand_corpus(const Dataset& pool, const BatchPartition& partition,
                           const CuratorConfig& config);

struct QaRoundResult {
    Dataset questions;             // Q after the round
    std::vector<QAItem> new_items; // accepted this round
    RoundRecord record;
    std::vector<std::string> warnings;
};

/// One QA gap-filling round. With Q empty the whole corpus is treated as the
/// gap (bootstrap); otherwise gap points come from select_gap(corpus, Q).
/// Gap points go to the generator; returned items that reference no gap
/// point are dropped with a log line; the rest are embedded and appended.
/// An empty gap makes the round a no-op.
QaRoundResult qa_round(const Dataset& corpus, const Dataset& questions,
                       const CuratorConfig& config, QaGenerator& generator,
                       QuestionEmbedder& embedder);

struct InjectResult {
    Dataset questions;
    std::vector<QAItem> items; // retagged copies of the injected items
};

/// Appends user-interest questions unconditionally (no gap or compactness
/// gate), forcing their provenance to user_interest. Duplicate qids against
/// Q are an error naming the id.
InjectResult inject_user_interest(const Dataset& questions, std::vector<QAItem> interest_items,
                                  QuestionEmbedder& embedder, const Dataset& corpus);

struct PipelineResult {
    Dataset corpus;
    Dataset questions;
    std::vector<QAItem> qa_items; // all accepted QA items, injection included
    CurationTrace trace;
};

/// The QA half on its own: bootstrap over the corpus, run QA rounds until
/// the question gap closes (or max_rounds, or the generator stops
/// producing), then inject user-interest items. Rounds are numbered from 1
/// within the returned trace.
PipelineResult run_qa_phase(const Dataset& corpus, const std::vector<QAItem>& interest_items,
                            const CuratorConfig& config, QaGenerator& generator,
                            QuestionEmbedder& embedder);

/// The full loop: partition the pool, expand the corpus, then run the QA
/// phase. The trace covers every phase; terminated_reason reflects the last
/// loop that ran.
PipelineResult run_pipeline(const Dataset& pool, const std::vector<QAItem>& interest_items,
                            const CuratorConfig& config, QaGenerator& generator,
                            QuestionEmbedder& embedder);

} // namespace semcov
