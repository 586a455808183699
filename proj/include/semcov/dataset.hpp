#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace semcov {

/// One embedded data chunk or question. Vectors are stored as-is; nothing
/// re-normalizes on ingest (density estimation works on raw Euclidean
/// distances, cosine paths normalize on the fly).
struct EmbeddingRecord {
    std::string id;
    std::string source;
    std::optional<std::string> text;
    std::vector<double> vector;

    bool operator==(const EmbeddingRecord&) const = default;
};

enum class DatasetRole { Space, Corpus, Questions, Batch };

const char* role_name(DatasetRole role);

/// An ordered, immutable-after-construction set of embedding records that all
/// share one dimension. Iteration order is the ingest order.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string name, DatasetRole role, std::size_t dim);

    /// Validates and appends. Rejects dimension mismatches, non-finite
    /// components and duplicate ids; `where` names the offending location in
    /// error messages (e.g. "line 7").
    void add(EmbeddingRecord rec, const std::string& where = {});

    const std::string& name() const { return name_; }
    DatasetRole role() const { return role_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<EmbeddingRecord>& records() const { return records_; }
    const EmbeddingRecord& at(std::size_t i) const { return records_[i]; }

    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    /// Index of a record by id; throws ReferenceError when absent.
    std::size_t index_of(const std::string& id) const;

    /// Subset by record ids, preserving the given order. Role becomes Batch.
    Dataset subset(const std::vector<std::string>& ids, const std::string& name) const;

    bool operator==(const Dataset& other) const {
        return dim_ == other.dim_ && records_ == other.records_;
    }

private:
    std::string name_;
    DatasetRole role_ = DatasetRole::Space;
    std::size_t dim_ = 0;
    std::vector<EmbeddingRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class BatchStrategy { BySource, FixedSize };

BatchStrategy parse_strategy(const std::string& name);
const char* strategy_name(BatchStrategy s);

/// Disjoint covering split of a dataset's record ids.
struct BatchPartition {
    BatchStrategy strategy = BatchStrategy::BySource;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;                 // one per batch
    std::vector<std::vector<std::string>> batches;   // record ids
};

// --- ingestion / export -----------------------------------------------------

/// Reads a JSONL dataset ({"id","source","text","vector"} per line).
/// dim is inferred from the first record. Empty files are an error.
Dataset ingest_jsonl(const std::filesystem::path& path,
                     DatasetRole role = DatasetRole::Space);

/// Canonical JSONL form: one object per line, keys in alphabetical order
/// (id, source, text, vector), "text" always present (null when absent),
/// numbers in shortest round-trip representation.
std::string export_jsonl(const Dataset& d);

/// Reads the binary pair: row-major float32 little-endian vectors plus a
/// JSONL index ({"row","id","source"}). dim must be supplied; the vectors
/// file length must be divisible by dim*4 and match the index row count.
Dataset ingest_binary(const std::filesystem::path& vectors_path,
                      const std::filesystem::path& index_path,
                      std::size_t dim,
                      DatasetRole role = DatasetRole::Space);

/// Writes the binary pair next to each other. Components are narrowed to
/// float32; callers that need exact round-trips must hold float-representable
/// values (ingest_binary widens losslessly).
void export_binary(const Dataset& d,
                   const std::filesystem::path& vectors_path,
                   const std::filesystem::path& index_path);

// --- partitioning ------------------------------------------------------------

/// BySource groups records by source tag in first-appearance order (k and
/// seed unused). FixedSize shuffles record order with the seed and chunks it
/// into ceil(n/k) batches. Batches are always disjoint and jointly cover d.
BatchPartition partition_batches(const Dataset& d, BatchStrategy strategy,
                                 std::size_t k, std::uint64_t seed);

} // namespace semcov
