#pragma once

// Shared test fixtures: scratch directories and random dataset builders.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semcov/curator.hpp"
#include "semcov/dataset.hpp"
#include "semcov/rng.hpp"

namespace testsup {

// One Open question per gap point on every call (no dedup across rounds, so
// repeated fill rounds keep producing); a call counter keeps qids unique.
// This makes generated-item counts track gap-set sizes exactly, which is what
// threshold-sweep tests need to observe.
class PerPointGenerator : public semcov::QaGenerator {
public:
    std::string name() const override { return "per-point"; }
    std::vector<semcov::QAItem> generate(const std::vector<semcov::GapPointInfo>& gap_points,
                                         std::vector<std::string>&) override {
        ++calls_;
        std::vector<semcov::QAItem> items;
        for (const auto& g : gap_points) {
            semcov::QAItem item;
            item.qid = "ask" + std::to_string(calls_) + "-" + g.id;
            item.format = semcov::QaFormat::Open;
            item.level = semcov::CogLevel::KC;
            item.question = "Round " + std::to_string(calls_) + ": what about " + g.id + "?";
            item.gold = {g.text.empty() ? g.id : g.text};
            item.provenance = semcov::Provenance::External;
            item.source_ids = {g.id};
            items.push_back(std::move(item));
        }
        return items;
    }

private:
    std::size_t calls_ = 0;
};

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("semcov-" + tag + "-" + std::to_string(++counter) + "-" +
                 std::to_string(static_cast<long>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Random dataset with float32-representable coordinates (survives the binary
// format's narrowing) spread over a handful of source tags.
inline semcov::Dataset random_dataset(semcov::Rng& rng, std::size_t n, std::size_t dim,
                                      std::size_t n_sources = 3,
                                      const std::string& name = "rand") {
    semcov::Dataset d(name, semcov::DatasetRole::Space, dim);
    for (std::size_t i = 0; i < n; ++i) {
        semcov::EmbeddingRecord rec;
        rec.id = "r" + std::to_string(i);
        rec.source = "src" + std::to_string(rng.below(n_sources));
        if (rng.below(4) != 0) rec.text = "text for record " + std::to_string(i);
        rec.vector.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j)
            rec.vector.push_back(static_cast<double>(static_cast<float>(rng.uniform(-3.0, 3.0))));
        d.add(std::move(rec));
    }
    return d;
}

// Gaussian cluster around a center point; plain doubles, no float narrowing.
inline void add_cluster(semcov::Dataset& d, semcov::Rng& rng, const std::string& id_prefix,
                        const std::string& source, const std::vector<double>& center,
                        double spread, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        semcov::EmbeddingRecord rec;
        rec.id = id_prefix + std::to_string(i);
        rec.source = source;
        rec.vector.reserve(center.size());
        for (double c : center) rec.vector.push_back(c + spread * rng.gauss());
        d.add(std::move(rec));
    }
}

} // namespace testsup
