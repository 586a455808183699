#include "semcov/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"
#include "semcov/rng.hpp"

namespace semcov {

const char* role_name(DatasetRole role) {
    switch (role) {
        case DatasetRole::Space: return "space";
        case DatasetRole::Corpus: return "corpus";
        case DatasetRole::Questions: return "questions";
        case DatasetRole::Batch: return "batch";
    }
    return "space";
}

BatchStrategy parse_strategy(const std::string& name) {
    if (name == "by-source") return BatchStrategy::BySource;
    if (name == "fixed-size") return BatchStrategy::FixedSize;
    throw ValidationError("unknown batch strategy '" + name + "' (expected by-source or fixed-size)");
}

const char* strategy_name(BatchStrategy s) {
    return s == BatchStrategy::BySource ? "by-source" : "fixed-size";
}

Dataset::Dataset(std::string name, DatasetRole role, std::size_t dim)
    : name_(std::move(name)), role_(role), dim_(dim) {}

void Dataset::add(EmbeddingRecord rec, const std::string& where) {
    const std::string at = where.empty() ? ("record '" + rec.id + "'") : where;
    if (dim_ == 0) {
        if (rec.vector.empty()) throw ValidationError(at + ": empty vector");
        dim_ = rec.vector.size();
    }
    if (rec.vector.size() != dim_) {
        throw ValidationError(at + ": dimension mismatch (got " +
                              std::to_string(rec.vector.size()) + ", expected " +
                              std::to_string(dim_) + ")");
    }
    for (double v : rec.vector) {
        if (!std::isfinite(v)) throw ValidationError(at + ": non-finite vector component");
    }
    if (index_.count(rec.id)) throw ValidationError(at + ": duplicate id '" + rec.id + "'");
    index_.emplace(rec.id, records_.size());
    records_.push_back(std::move(rec));
}

std::size_t Dataset::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ReferenceError("unknown record id '" + id + "'");
    return it->second;
}

Dataset Dataset::subset(const std::vector<std::string>& ids, const std::string& name) const {
    Dataset out(name, DatasetRole::Batch, dim_);
    for (const auto& id : ids) out.add(records_[index_of(id)]);
    return out;
}

// --- JSONL -------------------------------------------------------------------

Dataset ingest_jsonl(const std::filesystem::path& path, DatasetRole role) {
    Dataset d(path.stem().string(), role, 0);
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        const std::string where = path.filename().string() + " line " + std::to_string(lineno);
        if (!j.is_object() || !j.contains("id") || !j.contains("source") || !j.contains("vector"))
            throw ValidationError(where + ": record needs id, source and vector fields");
        EmbeddingRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.source = j.at("source").get<std::string>();
        if (j.contains("text") && !j.at("text").is_null())
            rec.text = j.at("text").get<std::string>();
        const auto& vec = j.at("vector");
        if (!vec.is_array()) throw ValidationError(where + ": vector must be an array");
        rec.vector.reserve(vec.size());
        for (const auto& v : vec) {
            if (!v.is_number()) throw ValidationError(where + ": non-numeric vector component");
            rec.vector.push_back(v.get<double>());
        }
        d.add(std::move(rec), where);
    });
    if (d.empty()) throw ValidationError(path.string() + ": empty dataset");
    return d;
}

std::string export_jsonl(const Dataset& d) {
    std::ostringstream out;
    for (const auto& rec : d.records()) {
        Json j;
        j["id"] = rec.id;
        j["source"] = rec.source;
        j["text"] = rec.text ? Json(*rec.text) : Json(nullptr);
        j["vector"] = rec.vector;
        out << j.dump() << '\n';
    }
    return out.str();
}

// --- binary ------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "binary vector format assumes a little-endian host");

Dataset ingest_binary(const std::filesystem::path& vectors_path,
                      const std::filesystem::path& index_path,
                      std::size_t dim, DatasetRole role) {
    if (dim == 0) throw ValidationError("dim must be positive");
    const std::string raw = read_file(vectors_path);
    const std::size_t row_bytes = dim * sizeof(float);
    if (raw.size() % row_bytes != 0) {
        throw ValidationError(vectors_path.string() + ": length " + std::to_string(raw.size()) +
                              " not divisible by dim*4 = " + std::to_string(row_bytes));
    }
    const std::size_t rows = raw.size() / row_bytes;

    struct IndexEntry { std::string id, source; };
    std::vector<IndexEntry> index(rows);
    std::vector<bool> seen(rows, false);
    std::size_t count = 0;
    for_each_jsonl(index_path, [&](std::size_t lineno, const Json& j) {
        const std::string where = index_path.filename().string() + " line " + std::to_string(lineno);
        if (!j.contains("row") || !j.contains("id") || !j.contains("source"))
            throw ValidationError(where + ": index entries need row, id and source fields");
        if (!j.at("row").is_number_unsigned())
            throw ValidationError(where + ": row must be a non-negative integer");
        const auto row = j.at("row").get<std::size_t>();
        if (row >= rows) throw ValidationError(where + ": row " + std::to_string(row) +
                                               " out of range for " + std::to_string(rows) + " rows");
        if (seen[row]) throw ValidationError(where + ": duplicate row " + std::to_string(row));
        seen[row] = true;
        index[row] = {j.at("id").get<std::string>(), j.at("source").get<std::string>()};
        ++count;
    });
    if (count != rows) {
        throw ValidationError(index_path.string() + ": index has " + std::to_string(count) +
                              " entries for " + std::to_string(rows) + " vector rows");
    }

    Dataset d(vectors_path.stem().string(), role, dim);
    for (std::size_t r = 0; r < rows; ++r) {
        EmbeddingRecord rec;
        rec.id = index[r].id;
        rec.source = index[r].source;
        rec.vector.resize(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            float f;
            std::memcpy(&f, raw.data() + r * row_bytes + c * sizeof(float), sizeof(float));
            rec.vector[c] = static_cast<double>(f);
        }
        d.add(std::move(rec), "row " + std::to_string(r));
    }
    if (d.empty()) throw ValidationError(vectors_path.string() + ": empty dataset");
    return d;
}

void export_binary(const Dataset& d,
                   const std::filesystem::path& vectors_path,
                   const std::filesystem::path& index_path) {
    std::string raw;
    raw.reserve(d.size() * d.dim() * sizeof(float));
    for (const auto& rec : d.records()) {
        for (double v : rec.vector) {
            const float f = static_cast<float>(v);
            char buf[sizeof(float)];
            std::memcpy(buf, &f, sizeof(float));
            raw.append(buf, sizeof(float));
        }
    }
    atomic_write(vectors_path, raw);

    std::vector<Json> lines;
    lines.reserve(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) {
        Json j;
        j["row"] = r;
        j["id"] = d.at(r).id;
        j["source"] = d.at(r).source;
        lines.push_back(std::move(j));
    }
    write_jsonl(index_path, lines);
}

// --- partitioning ------------------------------------------------------------

BatchPartition partition_batches(const Dataset& d, BatchStrategy strategy,
                                 std::size_t k, std::uint64_t seed) {
    BatchPartition p;
    p.strategy = strategy;
    p.seed = seed;
    if (strategy == BatchStrategy::BySource) {
        std::vector<std::string> order;
        std::unordered_map<std::string, std::size_t> pos;
        for (const auto& rec : d.records()) {
            auto it = pos.find(rec.source);
            if (it == pos.end()) {
                pos.emplace(rec.source, p.batches.size());
                order.push_back(rec.source);
                p.batches.emplace_back();
                it = pos.find(rec.source);
            }
            p.batches[it->second].push_back(rec.id);
        }
        p.labels = std::move(order);
    } else {
        if (k == 0) throw ValidationError("fixed-size partition needs k >= 1");
        std::vector<std::string> ids;
        ids.reserve(d.size());
        for (const auto& rec : d.records()) ids.push_back(rec.id);
        Rng rng(seed);
        rng.shuffle(ids);
        for (std::size_t start = 0; start < ids.size(); start += k) {
            const std::size_t end = std::min(start + k, ids.size());
            p.batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                   ids.begin() + static_cast<std::ptrdiff_t>(end));
            p.labels.push_back("chunk-" + std::to_string(p.batches.size() - 1));
        }
    }
    return p;
}

} // namespace semcov
