#include "tsweave/fim.hpp"

#include <algorithm>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "tsweave/lexer.hpp"
#include "tsweave/parser.hpp"
#include "tsweave/token_edit.hpp"
#include "tsweave/type_parser.hpp"

namespace tsweave {

namespace {

struct EndpointUrl {
    std::string origin;  // scheme://host:port
    std::string path;
};

EndpointUrl split_url(const std::string& url) {
    size_t hostStart = 0;
    if (auto schemeEnd = url.find("://"); schemeEnd != std::string::npos)
        hostStart = schemeEnd + 3;
    auto pathStart = url.find('/', hostStart);
    if (pathStart == std::string::npos) return {url, "/"};
    return {url.substr(0, pathStart), url.substr(pathStart)};
}

std::string strip_end_of_mask(std::string text, const std::string& endOfMask) {
    if (auto cut = text.find(endOfMask); cut != std::string::npos) text.resize(cut);
    return text;
}

}  // namespace

FimClient http_fim_client(const std::string& url) {
    EndpointUrl endpoint = split_url(url);
    return [endpoint](const FimRequest& req) -> FimResponse {
        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(300, 0);
        nlohmann::json body = {
            {"prompt", req.prompt},
            {"max_new_tokens", req.maxNewTokens},
            {"stop", req.stopSequences},
        };
        httplib::Result res = client.Post(endpoint.path, body.dump(), "application/json");
        if (!res)
            throw EndpointUnavailable("completion service " + endpoint.origin + " unreachable: " +
                                      httplib::to_string(res.error()));
        if (res->status != 200)
            throw EndpointUnavailable("completion service returned HTTP " +
                                      std::to_string(res->status));
        try {
            auto json = nlohmann::json::parse(res->body);
            return FimResponse{json.at("text").get<std::string>()};
        } catch (const nlohmann::json::exception& e) {
            throw EndpointUnavailable(std::string("malformed completion response: ") + e.what());
        }
    };
}

FimRequest build_fim_prompt(const SourceUnit& unit, const AnnotationSite& site,
                            const FimConfig& config) {
    if (site.kind != SiteKind::FunctionParameter)
        throw SiteNotParameter(std::string("cannot build a completion prompt for a ") +
                               to_string(site.kind) + " site");

    const js::Token& name = unit.ast.token(site.insertAfterToken);
    size_t cut = name.offset + name.text.size();
    const std::string& text = unit.text;

    // Budget half the window to each side; a side near the file boundary
    // hands its unused share to the other.
    size_t half = config.contextWindow / 2;
    size_t afterLen = std::min(text.size() - cut, config.contextWindow - std::min(cut, half));
    size_t beforeLen = std::min(cut, config.contextWindow - afterLen);

    FimRequest req;
    req.prompt.reserve(beforeLen + afterLen + 2 * config.maskZero.size() + config.maskOne.size() +
                       2);
    req.prompt.append(text, cut - beforeLen, beforeLen);
    req.prompt += ": ";
    req.prompt += config.maskZero;
    req.prompt.append(text, cut, afterLen);
    req.prompt += config.maskOne;
    req.prompt += config.maskZero;
    req.maxNewTokens = config.maxNewTokens;
    req.stopSequences = {config.endOfMask};
    return req;
}

std::optional<std::string> extract_valid_type_prefix(const std::string& generated) {
    // Generations are free-form and can stop mid-string or mid-comment, so
    // lex leniently: cut at the first malformed byte and retry on the rest.
    std::string candidate = generated;
    js::TokenFile lexed;
    for (;;) {
        if (candidate.empty()) return std::nullopt;
        try {
            lexed = js::lex(candidate);
            break;
        } catch (const js::LexError& e) {
            size_t keep = std::min(e.offset, candidate.size() - 1);
            if (keep == 0) return std::nullopt;
            candidate.resize(keep);
        }
    }
    for (size_t k = lexed.tokens.size(); k > 0; --k) {
        const js::Token& last = lexed.tokens[k - 1];
        std::string prefix = candidate.substr(0, last.offset + last.text.size());
        if (ts::parses_as_type(prefix)) return prefix;
    }
    return std::nullopt;
}

FimFileResult annotate_parameters_via_fim(const SourceUnit& unit, const FimClient& client,
                                          const FimConfig& config) {
    FimFileResult out;
    out.unit = unit;
    if (!unit.parsed) return out;

    auto parameter_sites = [](const js::Ast& ast) {
        std::vector<AnnotationSite> params;
        for (auto& site : collect_sites(ast))
            if (site.kind == SiteKind::FunctionParameter) params.push_back(site);
        return params;
    };

    out.stats.sitesFound = parameter_sites(unit.ast).size();

    // One parameter at a time, front to back. Each accepted annotation is
    // spliced in and the file re-parsed before moving on, so the next prompt
    // already shows the earlier types; `skipped` counts the parameters given
    // up on, which stay at the front of every fresh site collection.
    size_t skipped = 0;
    for (;;) {
        std::vector<AnnotationSite> params = parameter_sites(out.unit.ast);
        if (skipped >= params.size()) break;
        const AnnotationSite& site = params[skipped];

        bool annotated = false;
        for (size_t attempt = 0; attempt < config.attempts && !annotated; ++attempt) {
            FimRequest req = build_fim_prompt(out.unit, site, config);
            FimResponse resp;
            try {
                resp = client(req);
            } catch (const EndpointUnavailable&) {
                out.aborted = true;
                out.unit = unit;
                out.stats.sitesAnnotated = 0;
                out.stats.unmatched = out.stats.sitesFound;
                return out;
            }
            ++out.requests;

            auto type =
                extract_valid_type_prefix(strip_end_of_mask(resp.generatedText, config.endOfMask));
            if (!type) continue;

            std::string woven = js::apply_splices(
                out.unit.ast.file,
                {js::TokenSplice::insert_after(site.insertAfterToken, ": " + *type)});
            try {
                js::Ast reparsed = js::parse_program(woven);
                out.unit.text = std::move(woven);
                out.unit.ast = std::move(reparsed);
                annotated = true;
            } catch (const std::exception&) {
                // A type the grammar likes can still break the statement it
                // lands in; treat it like an invalid generation and retry.
            }
        }
        if (annotated)
            ++out.stats.sitesAnnotated;
        else
            ++skipped;
    }
    out.stats.unmatched = out.stats.sitesFound - out.stats.sitesAnnotated;
    return out;
}

}  // namespace tsweave
