#pragma once

#include <string>
#include <vector>

namespace semcov {

/// Fetches embeddings from a remote encoder service. The request is a POST of
/// `{"texts": [...]}` to the endpoint URL; the response must carry
/// `{"vectors": [[...], ...]}` with one equal-dimension vector per text, in
/// input order. Transport failures, bad statuses, count mismatches and ragged
/// dimensions all raise HookError.
std::vector<std::vector<double>> embed_remote(const std::vector<std::string>& texts,
                                              const std::string& endpoint);

} // namespace semcov
