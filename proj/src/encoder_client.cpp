#include "semcov/encoder_client.hpp"

#include <httplib.h>

#include <cmath>

#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"

namespace semcov {

namespace {

// Splits "http://host:port/path" into the client base and the request path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("encoder endpoint must be an http URL: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

} // namespace

std::vector<std::vector<double>> embed_remote(const std::vector<std::string>& texts,
                                              const std::string& endpoint) {
    if (texts.empty()) throw ValidationError("embed_remote: empty text list");

    const auto [base, path] = split_endpoint(endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);

    Json request;
    request["texts"] = texts;
    const auto res = client.Post(path, request.dump(), "application/json");
    if (!res)
        throw HookError("encoder request to " + endpoint +
                        " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw HookError("encoder at " + endpoint + " returned status " +
                        std::to_string(res->status));

    Json body;
    try {
        body = Json::parse(res->body);
    } catch (const Json::parse_error& e) {
        throw HookError(std::string("encoder response is not valid JSON: ") + e.what());
    }
    if (!body.contains("vectors") || !body["vectors"].is_array())
        throw HookError("encoder response lacks a vectors array");

    const Json& rows = body["vectors"];
    if (rows.size() != texts.size())
        throw HookError("encoder returned " + std::to_string(rows.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");

    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    std::size_t dim = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Json& row = rows[i];
        if (!row.is_array() || row.empty())
            throw HookError("encoder vector " + std::to_string(i) + " is not a non-empty array");
        std::vector<double> vec;
        vec.reserve(row.size());
        for (const auto& v : row) {
            if (!v.is_number())
                throw HookError("encoder vector " + std::to_string(i) + " has a non-numeric entry");
            const double x = v.get<double>();
            if (!std::isfinite(x))
                throw HookError("encoder vector " + std::to_string(i) + " has a non-finite entry");
            vec.push_back(x);
        }
        if (i == 0) {
            dim = vec.size();
        } else if (vec.size() != dim) {
            throw HookError("encoder vector " + std::to_string(i) + " has dim " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim));
        }
        out.push_back(std::move(vec));
    }
    return out;
}

} // namespace semcov
