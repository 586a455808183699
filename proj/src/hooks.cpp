#include "semcov/hooks.hpp"

#include <httplib.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "semcov/encoder_client.hpp"
#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"

namespace semcov {

// --- generators ----------------------------------------------------------------

std::vector<QAItem> EchoQaGenerator::generate(const std::vector<GapPointInfo>& gap_points,
                                              std::vector<std::string>& warnings) {
    (void)warnings;
    std::vector<QAItem> items;
    for (const auto& g : gap_points) {
        if (!served_.insert(g.id).second) continue; // one question per point, ever
        QAItem item;
        item.qid = "echo-" + g.id;
        item.format = QaFormat::Open;
        item.level = CogLevel::KC;
        item.question = g.text.empty() ? "What does record " + g.id + " describe?"
                                       : "Summarize: " + g.text;
        item.gold = {g.text.empty() ? g.id : g.text};
        item.provenance = Provenance::External;
        item.source_ids = {g.id};
        items.push_back(std::move(item));
    }
    return items;
}

TemplateQaGenerator::TemplateQaGenerator(EntityStore store, TemplateSet templates,
                                         std::size_t per_round, std::uint64_t seed)
    : store_(std::move(store)), templates_(std::move(templates)), per_round_(per_round),
      seed_(seed) {
    if (per_round_ < 1) throw ValidationError("template generator: per_round must be >= 1");
}

std::vector<QAItem> TemplateQaGenerator::generate(const std::vector<GapPointInfo>& gap_points,
                                                  std::vector<std::string>& warnings) {
    const std::size_t call = ++calls_;

    EntityStore slice;
    for (const auto& g : gap_points)
        if (store_.contains(g.id)) slice.add(store_.by_id(g.id));
    if (slice.empty()) {
        warnings.push_back("template generator: no gap point matches a stored entity");
        return {};
    }

    const std::uint64_t seed = seed_ + call;
    std::vector<QAItem> items;
    auto take = [&](GenResult&& r) {
        for (auto& w : r.warnings) warnings.push_back("template generator: " + std::move(w));
        for (auto& item : r.items) {
            if (items.size() >= per_round_) return;
            item.qid = "r" + std::to_string(call) + "-" + item.qid;
            items.push_back(std::move(item));
        }
    };

    const std::size_t bin_count = std::max<std::size_t>(1, per_round_ / 3);
    const std::size_t mcq_count = std::max<std::size_t>(1, per_round_ / 3);
    if (!templates_.binary.empty())
        take(gen_binary(slice, templates_.binary, bin_count, seed));
    if (items.size() < per_round_ && !templates_.mcq.empty())
        take(gen_mcq(slice, templates_.mcq, mcq_count, seed + 1));
    for (std::size_t p = 0; p < templates_.maq.size() && items.size() < per_round_; ++p)
        take(gen_maq(slice, templates_.maq[p], per_round_ - items.size(), seed + 2 + p));
    return items;
}

Json gap_request_json(const std::vector<GapPointInfo>& gap_points) {
    Json req;
    req["gap_points"] = Json::array();
    for (const auto& g : gap_points) {
        Json p;
        p["id"] = g.id;
        p["source"] = g.source;
        p["text"] = g.text;
        req["gap_points"].push_back(std::move(p));
    }
    return req;
}

std::vector<QAItem> parse_generator_response(const std::string& body, const std::string& origin) {
    Json parsed;
    try {
        parsed = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw HookError("generator " + origin + " returned invalid JSON: " + e.what());
    }
    if (!parsed.contains("items") || !parsed["items"].is_array())
        throw HookError("generator " + origin + " response lacks an items array");
    std::vector<QAItem> items;
    std::size_t n = 0;
    for (const auto& j : parsed["items"]) {
        try {
            items.push_back(QAItem::from_json(j, origin + " item " + std::to_string(n)));
        } catch (const ValidationError& e) {
            throw HookError(std::string("generator response item rejected: ") + e.what());
        }
        ++n;
    }
    return items;
}

CommandQaGenerator::CommandQaGenerator(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw ValidationError("exec generator: empty command");
}

std::vector<QAItem> CommandQaGenerator::generate(const std::vector<GapPointInfo>& gap_points,
                                                 std::vector<std::string>& warnings) {
    (void)warnings;
    static std::atomic<unsigned> counter{0};
    const auto dir = std::filesystem::temp_directory_path();
    const std::string tag = "semcov-gen-" + std::to_string(static_cast<long>(::getpid())) + "-" +
                            std::to_string(counter.fetch_add(1));
    const auto req_path = dir / (tag + "-req.json");
    const auto resp_path = dir / (tag + "-resp.json");

    atomic_write(req_path, gap_request_json(gap_points).dump());
    const std::string cmdline =
        command_ + " < '" + req_path.string() + "' > '" + resp_path.string() + "'";
    const int status = std::system(cmdline.c_str());

    std::string body;
    {
        std::ifstream in(resp_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        body = buf.str();
    }
    std::error_code ec;
    std::filesystem::remove(req_path, ec);
    std::filesystem::remove(resp_path, ec);

    if (status != 0)
        throw HookError("generator command '" + command_ + "' exited with status " +
                        std::to_string(status));
    return parse_generator_response(body, "'" + command_ + "'");
}

HttpQaGenerator::HttpQaGenerator(std::string url) : url_(std::move(url)) {
    if (url_.find("://") == std::string::npos)
        throw ValidationError("http generator: not a URL: " + url_);
}

std::vector<QAItem> HttpQaGenerator::generate(const std::vector<GapPointInfo>& gap_points,
                                              std::vector<std::string>& warnings) {
    (void)warnings;
    const auto path_start = url_.find('/', url_.find("://") + 3);
    const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    const auto res = client.Post(path, gap_request_json(gap_points).dump(), "application/json");
    if (!res)
        throw HookError("generator request to " + url_ +
                        " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw HookError("generator at " + url_ + " returned status " +
                        std::to_string(res->status));
    return parse_generator_response(res->body, url_);
}

std::unique_ptr<QaGenerator> make_generator(const std::string& spec, std::uint64_t seed) {
    if (spec == "echo") return std::make_unique<EchoQaGenerator>();
    if (spec.rfind("exec:", 0) == 0)
        return std::make_unique<CommandQaGenerator>(spec.substr(5));
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        return std::make_unique<HttpQaGenerator>(spec);
    if (spec.rfind("template:", 0) == 0) {
        const std::string args = spec.substr(9);
        std::vector<std::string> parts;
        std::string cur;
        for (char c : args) {
            if (c == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        parts.push_back(cur);
        if (parts.size() < 2 || parts[0].empty() || parts[1].empty())
            throw ValidationError(
                "template generator spec is template:<entities.jsonl>,<templates.json>[,<n>]");
        std::size_t per_round = 24;
        if (parts.size() >= 3 && !parts[2].empty()) {
            try {
                std::size_t consumed = 0;
                per_round = std::stoul(parts[2], &consumed);
                if (consumed != parts[2].size()) throw std::invalid_argument(parts[2]);
            } catch (const std::exception&) {
                throw ValidationError("template generator spec: bad per-round count '" +
                                      parts[2] + "'");
            }
        }
        return std::make_unique<TemplateQaGenerator>(EntityStore::from_jsonl(parts[0]),
                                                     TemplateSet::from_json_file(parts[1]),
                                                     per_round, seed);
    }
    throw ValidationError("unknown generator spec '" + spec +
                          "' (expected echo, exec:<cmd>, http(s)://<url>, or template:...)");
}

// --- embedders -----------------------------------------------------------------

namespace {

std::vector<double> hash_embed_text(const std::string& text, std::size_t dim) {
    std::vector<double> vec(dim, 0.0);
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a offset basis
    bool in_token = false;
    auto flush = [&]() {
        if (!in_token) return;
        vec[h % dim] += (h >> 32) & 1 ? 1.0 : -1.0;
        h = 1469598103934665603ULL;
        in_token = false;
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            h = (h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(lower))) *
                1099511628211ULL;
            in_token = true;
        } else {
            flush();
        }
    }
    flush();
    double norm = 0.0;
    for (double v : vec) norm += v * v;
    if (norm == 0.0) {
        vec[0] = 1.0; // no tokens at all: a fixed unit direction
        return vec;
    }
    norm = std::sqrt(norm);
    for (double& v : vec) v /= norm;
    return vec;
}

} // namespace

std::vector<std::vector<double>> HashQuestionEmbedder::embed(const std::vector<QAItem>& items,
                                                             const Dataset& corpus) {
    if (corpus.dim() == 0) throw ValidationError("hash embedder: corpus dimension is zero");
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(hash_embed_text(item.question, corpus.dim()));
    return out;
}

std::vector<std::vector<double>> AnchoredQuestionEmbedder::embed(const std::vector<QAItem>& items,
                                                                 const Dataset& corpus) {
    if (corpus.dim() == 0) throw ValidationError("anchored embedder: corpus dimension is zero");
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        std::vector<double> mean(corpus.dim(), 0.0);
        std::size_t hits = 0;
        for (const auto& sid : item.source_ids) {
            if (!corpus.contains(sid)) continue;
            const auto& vec = corpus.at(corpus.index_of(sid)).vector;
            for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += vec[j];
            ++hits;
        }
        if (hits == 0) {
            out.push_back(hash_embed_text(item.question, corpus.dim()));
            continue;
        }
        for (double& v : mean) v /= static_cast<double>(hits);
        out.push_back(std::move(mean));
    }
    return out;
}

RemoteQuestionEmbedder::RemoteQuestionEmbedder(std::string endpoint)
    : endpoint_(std::move(endpoint)) {
    if (endpoint_.empty()) throw ValidationError("remote embedder: empty endpoint");
}

std::vector<std::vector<double>> RemoteQuestionEmbedder::embed(const std::vector<QAItem>& items,
                                                               const Dataset& corpus) {
    std::vector<std::string> texts;
    texts.reserve(items.size());
    for (const auto& item : items) texts.push_back(item.question);
    auto vectors = embed_remote(texts, endpoint_);
    if (!vectors.empty() && corpus.dim() != 0 && vectors[0].size() != corpus.dim())
        throw HookError("encoder returned dim " + std::to_string(vectors[0].size()) +
                        " but the corpus is dim " + std::to_string(corpus.dim()));
    return vectors;
}

std::unique_ptr<QuestionEmbedder> make_embedder(const std::string& spec) {
    if (spec == "hash") return std::make_unique<HashQuestionEmbedder>();
    if (spec == "anchored") return std::make_unique<AnchoredQuestionEmbedder>();
    if (spec.rfind("remote:", 0) == 0)
        return std::make_unique<RemoteQuestionEmbedder>(spec.substr(7));
    throw ValidationError("unknown embedder spec '" + spec +
                          "' (expected hash, anchored, or remote:<url>)");
}

} // namespace semcov
