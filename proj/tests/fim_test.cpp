#include "tsweave/fim.hpp"

#include <atomic>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "tsweave/lexer.hpp"
#include "tsweave/parser.hpp"
#include "tsweave/type_parser.hpp"
#include "tsweave/weave.hpp"

using namespace tsweave;

namespace {

SourceUnit unit_of(std::string text, std::string path = "a.js") {
    SourceUnit u;
    u.relativePath = std::move(path);
    u.text = std::move(text);
    u.ast = js::parse_program(u.text);
    u.parsed = true;
    return u;
}

AnnotationSite first_param_site(const SourceUnit& unit) {
    for (const auto& s : collect_sites(unit.ast))
        if (s.kind == SiteKind::FunctionParameter) return s;
    REQUIRE_MESSAGE(false, "no parameter site in ", unit.text);
    return {};
}

// A client that replays a fixed script of generations and records every
// prompt it was asked for.
struct ScriptedClient {
    std::vector<std::string> script;
    std::vector<std::string> prompts;
    size_t next = 0;

    FimClient client() {
        return [this](const FimRequest& req) -> FimResponse {
            prompts.push_back(req.prompt);
            REQUIRE(next < script.size());
            return FimResponse{script[next++]};
        };
    }
};

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t n = 0;
    for (size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("prompt splices the mask after the parameter and appends the trailing sentinels") {
    auto unit = unit_of("function f(x) {\n  return x + 1;\n}");
    FimRequest req = build_fim_prompt(unit, first_param_site(unit));
    CHECK(req.prompt ==
          "function f(x: <|mask:0|>) {\n  return x + 1;\n}<|mask:1|><|mask:0|>");
    CHECK(req.maxNewTokens == 50);
    CHECK(req.stopSequences == std::vector<std::string>{"<|endofmask|>"});
}

TEST_CASE("prompt window cuts both sides around the insertion point") {
    std::string padding(3000, ';');
    auto unit = unit_of(padding + "\nfunction f(x) { return x; }\n" + padding);
    FimConfig config;
    auto req = build_fim_prompt(unit, first_param_site(unit), config);

    size_t cut = 3001 + 12;  // right after the parameter name
    std::string expected = unit.text.substr(cut - 1000, 1000) + ": <|mask:0|>" +
                           unit.text.substr(cut, 1000) + "<|mask:1|><|mask:0|>";
    CHECK(req.prompt == expected);
}

TEST_CASE("a site near the file start hands its spare budget to the suffix") {
    auto unit = unit_of("function f(x) { return x; }\n// " + std::string(3000, 'x'));
    FimConfig config;
    auto req = build_fim_prompt(unit, first_param_site(unit), config);

    CHECK(req.prompt.starts_with("function f(x: <|mask:0|>"));
    size_t overhead = 2 * config.maskZero.size() + config.maskOne.size() + 2;
    CHECK(req.prompt.size() == config.contextWindow + overhead);
    CHECK(req.prompt.ends_with("<|mask:1|><|mask:0|>"));
}

TEST_CASE("a tiny window still yields both sentinels in order") {
    auto unit = unit_of("function f(x) {\n  return x + 1;\n}");
    FimConfig config;
    config.contextWindow = 8;
    auto req = build_fim_prompt(unit, first_param_site(unit), config);
    CHECK(req.prompt == " f(x: <|mask:0|>) {\n<|mask:1|><|mask:0|>");
}

TEST_CASE("prompts are refused for non-parameter sites") {
    auto unit = unit_of("var q = 1;\nfunction f(a) { return a; }");
    auto sites = collect_sites(unit.ast);
    REQUIRE(sites.size() == 3);
    CHECK(sites[0].kind == SiteKind::VariableDeclaration);
    CHECK_THROWS_AS((void)build_fim_prompt(unit, sites[0]), SiteNotParameter);
    CHECK(sites[1].kind == SiteKind::FunctionResult);
    CHECK_THROWS_AS((void)build_fim_prompt(unit, sites[1]), SiteNotParameter);
}

TEST_CASE("the longest valid prefix is cut at a token boundary") {
    CHECK(extract_valid_type_prefix("number, y: number") == "number");
    CHECK(extract_valid_type_prefix("string") == "string");
    CHECK(extract_valid_type_prefix("{x: number, y:") == std::nullopt);
    CHECK(extract_valid_type_prefix("number | string garbage") == "number | string");

    CHECK(extract_valid_type_prefix("Array<numbe") == "Array");
    CHECK(extract_valid_type_prefix("Map<string, number>) {") == "Map<string, number>");
    CHECK(extract_valid_type_prefix("%%%% not a type") == std::nullopt);
    CHECK(extract_valid_type_prefix("") == std::nullopt);
    CHECK(extract_valid_type_prefix("   ") == std::nullopt);
}

TEST_CASE("prefix extraction never cuts inside a token") {
    // "number" alone would parse, but it is not a token boundary here.
    CHECK(extract_valid_type_prefix("numberish rest") == "numberish");
    // Numeric literal types cut after the number, not inside it.
    CHECK(extract_valid_type_prefix("123abc") == "123");
}

TEST_CASE("prefix extraction survives generations that do not even lex") {
    CHECK(extract_valid_type_prefix("string 'unterminated") == "string");
    CHECK(extract_valid_type_prefix("number /* unclosed comment") == "number");
    CHECK(extract_valid_type_prefix("'broken from the first byte") == std::nullopt);
}

TEST_CASE("prefix extraction rejects multi-line and commented candidates") {
    CHECK(extract_valid_type_prefix("number |\n string") == "number");
    CHECK(extract_valid_type_prefix("number /* note */ []") == "number");
}

TEST_CASE("prefix extraction agrees with a brute-force boundary scan") {
    std::vector<std::string> corpus = {
        "number, y: number",
        "string) { return x; }",
        "Array<string>y stuff",
        "{a: number}} extra",
        "(x: string) => void, done",
        "number[] | null huh",
        "unknown",
        "never ever",
        "number<|mask:1|>",
    };
    for (const auto& text : corpus) {
        CAPTURE(text);
        auto got = extract_valid_type_prefix(text);

        std::optional<std::string> expected;
        try {
            auto lexed = js::lex(text);
            for (const auto& token : lexed.tokens) {
                std::string prefix = text.substr(0, token.offset + token.text.size());
                if (ts::parses_as_type(prefix)) expected = prefix;
            }
        } catch (const js::LexError&) {
            REQUIRE_MESSAGE(false, "corpus entry must lex: ", text);
        }
        CHECK(got == expected);
    }
}

TEST_CASE("appending junk to a valid type never shrinks the extracted prefix") {
    std::vector<std::string> bases = {
        "number",
        "string[]",
        "Array<string>",
        "{x: number}",
        "number | string",
        "(a: string) => void",
        "Map<string, number>",
        "boolean",
    };
    std::vector<std::string> suffixes = {
        " garbage",       ", y: number", ") { return x; }", "; rest",
        "[] extra",       " | undefined tail", "\n}",       "ish more",
        " /* trailing */", " = 1;",
    };
    std::mt19937 rng(20260816);
    for (int round = 0; round < 200; ++round) {
        const auto& base = bases[rng() % bases.size()];
        const auto& suffix = suffixes[rng() % suffixes.size()];
        std::string input = base + suffix;
        CAPTURE(input);
        auto got = extract_valid_type_prefix(input);
        REQUIRE(got.has_value());
        CHECK(got->size() >= base.size());
        CHECK(input.compare(0, got->size(), *got) == 0);
        CHECK(ts::parses_as_type(*got));
    }
}

TEST_CASE("one parameter is annotated end to end") {
    auto unit = unit_of("function f(x) {\n  return x + 1;\n}");
    ScriptedClient stub{{"number, y: number<|endofmask|>"}};
    auto result = annotate_parameters_via_fim(unit, stub.client());

    CHECK(result.unit.text == "function f(x: number) {\n  return x + 1;\n}");
    CHECK(result.unit.parsed);
    CHECK(result.stats.sitesFound == 1);
    CHECK(result.stats.sitesAnnotated == 1);
    CHECK(result.stats.unmatched == 0);
    CHECK(result.requests == 1);
    CHECK_FALSE(result.aborted);
    REQUIRE(stub.prompts.size() == 1);
    CHECK(stub.prompts[0] ==
          "function f(x: <|mask:0|>) {\n  return x + 1;\n}<|mask:1|><|mask:0|>");
}

TEST_CASE("later prompts see the types accepted earlier") {
    auto unit = unit_of("function g(a, b) { return a + b; }");
    ScriptedClient stub{{"number<|endofmask|>", "string<|endofmask|>"}};
    auto result = annotate_parameters_via_fim(unit, stub.client());

    CHECK(result.unit.text == "function g(a: number, b: string) { return a + b; }");
    CHECK(result.requests == 2);
    CHECK(result.stats.sitesAnnotated == 2);
    REQUIRE(stub.prompts.size() == 2);
    CHECK(stub.prompts[0].find("g(a: <|mask:0|>, b)") != std::string::npos);
    CHECK(stub.prompts[1].find("g(a: number, b: <|mask:0|>)") != std::string::npos);
}

TEST_CASE("an unusable generation is retried up to the attempt budget") {
    auto unit = unit_of("function f(x) { return x; }");
    ScriptedClient stub{{"%%%%", "####", "number<|endofmask|>"}};
    auto result = annotate_parameters_via_fim(unit, stub.client());
    CHECK(result.unit.text == "function f(x: number) { return x; }");
    CHECK(result.requests == 3);
    CHECK(result.stats.sitesAnnotated == 1);
}

TEST_CASE("a parameter whose attempts are exhausted stays bare") {
    auto unit = unit_of("function g(a, b) { return a + b; }");
    std::vector<std::string> script(6, "%%%%");
    script[5] = "string<|endofmask|>";
    ScriptedClient stub{script};
    FimConfig config;
    auto result = annotate_parameters_via_fim(unit, stub.client(), config);

    CHECK(result.unit.text == "function g(a, b: string) { return a + b; }");
    CHECK(result.stats.sitesFound == 2);
    CHECK(result.stats.sitesAnnotated == 1);
    CHECK(result.stats.unmatched == 1);
    CHECK(result.requests == 2 * config.attempts);
}

TEST_CASE("requests never exceed parameters times attempts") {
    auto unit = unit_of("function h(a, b, c) { return a; }\nconst k = (d) => d;");
    ScriptedClient stub{std::vector<std::string>(12, "%% not a type at all")};
    FimConfig config;
    auto result = annotate_parameters_via_fim(unit, stub.client(), config);
    CHECK(result.unit.text == unit.text);
    CHECK(result.stats.sitesFound == 4);
    CHECK(result.stats.sitesAnnotated == 0);
    CHECK(result.requests == 4 * config.attempts);
}

TEST_CASE("a dead endpoint aborts the file and rolls back earlier annotations") {
    auto unit = unit_of("function g(a, b) { return a + b; }");
    size_t calls = 0;
    FimClient flaky = [&](const FimRequest&) -> FimResponse {
        if (++calls == 1) return FimResponse{"number<|endofmask|>"};
        throw EndpointUnavailable("connection refused");
    };
    auto result = annotate_parameters_via_fim(unit, flaky);

    CHECK(result.aborted);
    CHECK(result.unit.text == unit.text);
    CHECK(result.stats.sitesFound == 2);
    CHECK(result.stats.sitesAnnotated == 0);
    CHECK(result.stats.unmatched == 2);
}

TEST_CASE("sentinels never leak into the annotated file") {
    auto unit = unit_of("function f(x, y) { return x + y; }");
    ScriptedClient stub{{
        "<|mask:0|> number<|endofmask|>",
        "number<|mask:1|><|endofmask|>",
        "<|mask:1|>junk",
        "string<|endofmask|>",
    }};
    auto result = annotate_parameters_via_fim(unit, stub.client());

    for (const char* sentinel : {"<|mask:0|>", "<|mask:1|>", "<|endofmask|>"})
        CHECK(result.unit.text.find(sentinel) == std::string::npos);
    CHECK_NOTHROW((void)js::parse_program(result.unit.text));
    CHECK(result.unit.text == "function f(x: number, y: string) { return x + y; }");
}

TEST_CASE("only parameters are prompted; other sites stay put") {
    auto unit = unit_of("var v = 1;\nfunction h(p) { return p; }");
    ScriptedClient stub{{"string<|endofmask|>"}};
    auto result = annotate_parameters_via_fim(unit, stub.client());

    CHECK(result.stats.sitesFound == 1);
    CHECK(result.unit.text == "var v = 1;\nfunction h(p: string) { return p; }");
    REQUIRE(stub.prompts.size() == 1);
    CHECK(stub.prompts[0].find("h(p: <|mask:0|>)") != std::string::npos);
}

TEST_CASE("already annotated parameters are skipped") {
    auto unit = unit_of("function k(x: number, y) { return y; }", "k.ts");
    ScriptedClient stub{{"string[]<|endofmask|>"}};
    auto result = annotate_parameters_via_fim(unit, stub.client());

    CHECK(result.stats.sitesFound == 1);
    CHECK(result.unit.text == "function k(x: number, y: string[]) { return y; }");
    CHECK(count_occurrences(stub.prompts[0], "<|mask:0|>") == 2);
}

TEST_CASE("an unparseable file is returned untouched with no requests") {
    SourceUnit unit;
    unit.relativePath = "broken.js";
    unit.text = "function (((";
    unit.parsed = false;
    unit.parseError = "unexpected token";
    bool called = false;
    FimClient stub = [&](const FimRequest&) -> FimResponse {
        called = true;
        return FimResponse{"number<|endofmask|>"};
    };
    auto result = annotate_parameters_via_fim(unit, stub);
    CHECK_FALSE(called);
    CHECK(result.unit.text == unit.text);
    CHECK(result.stats.sitesFound == 0);
    CHECK(result.requests == 0);
}

TEST_CASE("sentinel literals are configurable") {
    auto unit = unit_of("function f(x) { return x; }");
    FimConfig config;
    config.maskZero = "<FILL>";
    config.maskOne = "<TAIL>";
    config.endOfMask = "<STOP>";
    config.maxNewTokens = 12;
    ScriptedClient stub{{"boolean<STOP>leftovers"}};
    auto result = annotate_parameters_via_fim(unit, stub.client(), config);

    CHECK(result.unit.text == "function f(x: boolean) { return x; }");
    REQUIRE(stub.prompts.size() == 1);
    CHECK(stub.prompts[0] == "function f(x: <FILL>) { return x; }<TAIL><FILL>");
}

TEST_CASE("the insertion sentinel appears exactly once before the trailing pair") {
    auto unit = unit_of("const sum = (left, right) => left + right;");
    FimConfig config;
    for (const auto& site : collect_sites(unit.ast)) {
        if (site.kind != SiteKind::FunctionParameter) continue;
        auto req = build_fim_prompt(unit, site, config);
        CHECK(count_occurrences(req.prompt, config.maskZero) == 2);
        CHECK(req.prompt.ends_with(config.maskOne + config.maskZero));
        CHECK(req.prompt.find(config.maskZero) <
              req.prompt.size() - config.maskOne.size() - config.maskZero.size());
    }
}

TEST_CASE("the http client speaks the completion service protocol") {
    httplib::Server server;
    std::vector<nlohmann::json> seen;
    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        seen.push_back(body);
        nlohmann::json reply = {{"text", "number, y: number<|endofmask|>"}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto unit = unit_of("function f(x) {\n  return x + 1;\n}");
    auto client = http_fim_client("http://127.0.0.1:" + std::to_string(port) + "/generate");
    auto result = annotate_parameters_via_fim(unit, client);

    server.stop();
    serving.join();

    CHECK(result.unit.text == "function f(x: number) {\n  return x + 1;\n}");
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].at("prompt") ==
          "function f(x: <|mask:0|>) {\n  return x + 1;\n}<|mask:1|><|mask:0|>");
    CHECK(seen[0].at("max_new_tokens") == 50);
    CHECK(seen[0].at("stop") == nlohmann::json::array({"<|endofmask|>"}));
}

TEST_CASE("an unreachable service raises EndpointUnavailable") {
    auto client = http_fim_client("http://127.0.0.1:9/generate");
    FimRequest req{"prompt", 50, {"<|endofmask|>"}};
    CHECK_THROWS_AS((void)client(req), EndpointUnavailable);

    auto unit = unit_of("function f(x) { return x; }");
    auto result = annotate_parameters_via_fim(unit, client);
    CHECK(result.aborted);
    CHECK(result.unit.text == unit.text);
}

TEST_CASE("error statuses and malformed replies raise EndpointUnavailable") {
    httplib::Server server;
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("overloaded", "text/plain");
    });
    server.Post("/garble", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    server.Post("/missing", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"output\": \"number\"}", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::string base = "http://127.0.0.1:" + std::to_string(port);
    FimRequest req{"prompt", 50, {"<|endofmask|>"}};
    CHECK_THROWS_AS((void)http_fim_client(base + "/fail")(req), EndpointUnavailable);
    CHECK_THROWS_AS((void)http_fim_client(base + "/garble")(req), EndpointUnavailable);
    CHECK_THROWS_AS((void)http_fim_client(base + "/missing")(req), EndpointUnavailable);

    server.stop();
    serving.join();
}
