#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "semcov/encoder_client.hpp"
#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"

using namespace semcov;

namespace {

// Deterministic stand-in embedding: [length, first byte] of the text.
std::vector<double> stub_vector(const std::string& text) {
    return {static_cast<double>(text.size()),
            text.empty() ? 0.0 : static_cast<double>(static_cast<unsigned char>(text[0]))};
}

// In-process encoder stub with one route per failure mode.
class StubServer {
public:
    StubServer() {
        server_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
            const Json body = Json::parse(req.body);
            Json out;
            out["vectors"] = Json::array();
            for (const auto& t : body.at("texts")) out["vectors"].push_back(stub_vector(t));
            res.set_content(out.dump(), "application/json");
        });
        server_.Post("/short", [](const httplib::Request& req, httplib::Response& res) {
            const Json body = Json::parse(req.body);
            Json out;
            out["vectors"] = Json::array();
            if (!body.at("texts").empty())
                out["vectors"].push_back(stub_vector(body.at("texts")[0]));
            res.set_content(out.dump(), "application/json");
        });
        server_.Post("/ragged", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"vectors": [[1.0, 2.0], [3.0]]})", "application/json");
        });
        server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json at all", "text/plain");
        });
        server_.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
        server_.Post("/record", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                bodies_.push_back(req.body);
            }
            const Json body = Json::parse(req.body);
            Json out;
            out["vectors"] = Json::array();
            for (const auto& t : body.at("texts")) out["vectors"].push_back(stub_vector(t));
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }
    std::vector<std::string> bodies() {
        std::lock_guard<std::mutex> lock(mutex_);
        return bodies_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mutex_;
    std::vector<std::string> bodies_;
};

} // namespace

TEST_CASE("remote embedding round trip") {
    StubServer stub;

    SUBCASE("two texts give two equal-dim vectors in order") {
        const auto vecs = embed_remote({"hello", "hi"}, stub.url("/embed"));
        REQUIRE(vecs.size() == 2);
        CHECK(vecs[0] == stub_vector("hello"));
        CHECK(vecs[1] == stub_vector("hi"));
        CHECK(vecs[0].size() == vecs[1].size());
    }

    SUBCASE("count mismatch is a hook failure") {
        CHECK_THROWS_AS(embed_remote({"one", "two"}, stub.url("/short")), HookError);
    }

    SUBCASE("ragged dimensions are a hook failure") {
        CHECK_THROWS_AS(embed_remote({"one", "two"}, stub.url("/ragged")), HookError);
    }

    SUBCASE("non-json body is a hook failure") {
        CHECK_THROWS_AS(embed_remote({"one"}, stub.url("/garbage")), HookError);
    }

    SUBCASE("http error status is a hook failure") {
        CHECK_THROWS_AS(embed_remote({"one"}, stub.url("/fail")), HookError);
    }

    SUBCASE("empty text list is rejected before any request") {
        CHECK_THROWS_AS(embed_remote({}, stub.url("/embed")), ValidationError);
    }
}

TEST_CASE("batched requests preserve input order end to end") {
    StubServer stub;
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i)
        texts.push_back("question number " + std::to_string(i) + std::string(i % 7, 'x'));

    const auto vecs = embed_remote(texts, stub.url("/record"));
    REQUIRE(vecs.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(vecs[i][0] == static_cast<double>(texts[i].size()));

    // the stub saw exactly one request whose texts match input order verbatim
    const auto bodies = stub.bodies();
    REQUIRE(bodies.size() == 1);
    const Json seen = Json::parse(bodies[0]);
    REQUIRE(seen.at("texts").size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
        CHECK(seen.at("texts")[i].get<std::string>() == texts[i]);
}

TEST_CASE("unreachable endpoints fail as hook errors") {
    // nothing listens on this port; connection is refused quickly
    CHECK_THROWS_AS(embed_remote({"one"}, "http://127.0.0.1:1/embed"), HookError);
    CHECK_THROWS_AS(embed_remote({"one"}, "not-a-url"), ValidationError);
}
