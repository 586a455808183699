#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "semcov/curator.hpp"
#include "semcov/qa_gen.hpp"

namespace semcov {

/// Stub generator: one Open item per not-yet-served gap point, anchored at
/// that point. Useful for loop tests and smoke pipelines; the question count
/// tracks the gap count exactly.
class EchoQaGenerator : public QaGenerator {
public:
    std::string name() const override { return "echo"; }
    std::vector<QAItem> generate(const std::vector<GapPointInfo>& gap_points,
                                 std::vector<std::string>& warnings) override;

private:
    std::set<std::string> served_;
};

/// Template-engine generator: restricts the entity store to the entities
/// named by the gap points and runs the Binary/MCQ/MAQ template generators
/// over that slice. Items per call are capped at per_round; qids carry a
/// call counter so repeated rounds never collide.
class TemplateQaGenerator : public QaGenerator {
public:
    TemplateQaGenerator(EntityStore store, TemplateSet templates, std::size_t per_round,
                        std::uint64_t seed);

    std::string name() const override { return "template"; }
    std::vector<QAItem> generate(const std::vector<GapPointInfo>& gap_points,
                                 std::vector<std::string>& warnings) override;

private:
    EntityStore store_;
    TemplateSet templates_;
    std::size_t per_round_;
    std::uint64_t seed_;
    std::size_t calls_ = 0;
};

/// Subprocess generator speaking the wire protocol: the request JSON goes to
/// the command's stdin, the response JSON is read from its stdout. A nonzero
/// exit or malformed response raises HookError.
class CommandQaGenerator : public QaGenerator {
public:
    explicit CommandQaGenerator(std::string command);

    std::string name() const override { return "exec"; }
    std::vector<QAItem> generate(const std::vector<GapPointInfo>& gap_points,
                                 std::vector<std::string>& warnings) override;

private:
    std::string command_;
};

/// HTTP generator speaking the wire protocol via POST.
class HttpQaGenerator : public QaGenerator {
public:
    explicit HttpQaGenerator(std::string url);

    std::string name() const override { return "http"; }
    std::vector<QAItem> generate(const std::vector<GapPointInfo>& gap_points,
                                 std::vector<std::string>& warnings) override;

private:
    std::string url_;
};

/// Builds the request body `{"gap_points": [{"id","source","text"}...]}` and
/// parses the response body `{"items": [...]}`; shared by the subprocess and
/// HTTP generators.
Json gap_request_json(const std::vector<GapPointInfo>& gap_points);
std::vector<QAItem> parse_generator_response(const std::string& body, const std::string& origin);

/// Generator factory for CLI specs: "echo", "exec:<command>",
/// "http(s)://<url>", or "template:<entities.jsonl>,<templates.json>[,<n>]".
std::unique_ptr<QaGenerator> make_generator(const std::string& spec, std::uint64_t seed);

/// Feature-hashing text embedder: FNV-1a over lowercased alphanumeric
/// tokens, signed bucket accumulation at the corpus dimension, L2-normalized.
/// Pure function of the question text, so reruns are byte-stable.
class HashQuestionEmbedder : public QuestionEmbedder {
public:
    std::string name() const override { return "hash"; }
    std::vector<std::vector<double>> embed(const std::vector<QAItem>& items,
                                           const Dataset& corpus) override;
};

/// Places each question at the mean of its resolvable source records,
/// falling back to the hash embedder when none resolve. Questions generated
/// from records therefore sit exactly where their subject matter lives.
class AnchoredQuestionEmbedder : public QuestionEmbedder {
public:
    std::string name() const override { return "anchored"; }
    std::vector<std::vector<double>> embed(const std::vector<QAItem>& items,
                                           const Dataset& corpus) override;
};

/// Encoder-service embedder: ships question texts to the wire protocol of
/// embed_remote. The returned dimension must match the corpus.
class RemoteQuestionEmbedder : public QuestionEmbedder {
public:
    explicit RemoteQuestionEmbedder(std::string endpoint);

    std::string name() const override { return "remote"; }
    std::vector<std::vector<double>> embed(const std::vector<QAItem>& items,
                                           const Dataset& corpus) override;

private:
    std::string endpoint_;
};

/// Embedder factory: "hash", "anchored", or "remote:<url>".
std::unique_ptr<QuestionEmbedder> make_embedder(const std::string& spec);

} // namespace semcov
