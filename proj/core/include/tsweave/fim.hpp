#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsweave/project.hpp"
#include "tsweave/weave.hpp"

namespace tsweave {

class SiteNotParameter : public std::logic_error {
  public:
    explicit SiteNotParameter(const std::string& msg) : std::logic_error(msg) {}
};

class EndpointUnavailable : public std::runtime_error {
  public:
    explicit EndpointUnavailable(const std::string& msg) : std::runtime_error(msg) {}
};

struct FimConfig {
    // Sentinels as the completion model expects them. The insertion sentinel
    // marks the hole, the trailing pair asks the model to fill hole zero, and
    // generation stops at the end-of-mask token.
    std::string maskZero = "<|mask:0|>";
    std::string maskOne = "<|mask:1|>";
    std::string endOfMask = "<|endofmask|>";
    size_t contextWindow = 2000;
    size_t maxNewTokens = 50;
    size_t attempts = 3;
};

struct FimRequest {
    std::string prompt;
    size_t maxNewTokens = 0;
    std::vector<std::string> stopSequences;
};

struct FimResponse {
    std::string generatedText;
};

// A completion endpoint: takes one request, returns raw generated text.
// Implementations throw EndpointUnavailable when the service cannot be
// reached.
using FimClient = std::function<FimResponse(const FimRequest&)>;

// Client for an HTTP completion service. POSTs
// {"prompt": ..., "max_new_tokens": ..., "stop": [...]} to the URL and reads
// {"text": ...} back.
FimClient http_fim_client(const std::string& url);

// Builds the fill-in-the-middle prompt for one function parameter: the file
// text with `: <mask>` spliced in right after the parameter name, cut down to
// about contextWindow characters around the insertion point, with the
// trailing sentinels appended. Only parameter sites are supported.
FimRequest build_fim_prompt(const SourceUnit& unit, const AnnotationSite& site,
                            const FimConfig& config = {});

// The longest prefix of `generated`, cut at a token boundary, that parses as
// a complete single-line type. Empty optional when no prefix qualifies.
std::optional<std::string> extract_valid_type_prefix(const std::string& generated);

struct FimFileResult {
    SourceUnit unit;
    WeaveStats stats;
    size_t requests = 0;
    // The endpoint became unreachable; the file is returned unannotated.
    bool aborted = false;
};

// Annotates the function parameters of one file, one completion request at a
// time in source order. Each accepted annotation updates the text, so later
// prompts see earlier types. A parameter whose generations never yield a
// valid type after `attempts` tries stays unannotated.
FimFileResult annotate_parameters_via_fim(const SourceUnit& unit, const FimClient& client,
                                          const FimConfig& config = {});

}  // namespace tsweave
