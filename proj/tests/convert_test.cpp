#include "tsweave/convert.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tsweave/lexer.hpp"
#include "tsweave/parser.hpp"

using namespace tsweave;
namespace fs = std::filesystem;

namespace {

SourceUnit unit_of(std::string text, std::string path = "a.js") {
    SourceUnit u;
    u.relativePath = std::move(path);
    u.text = std::move(text);
    u.ast = js::parse_program(u.text);
    u.parsed = true;
    return u;
}

std::string convert_text(const std::string& text) {
    auto outcome = convert_file(unit_of(text));
    REQUIRE(outcome.status == ConversionStatus::Converted);
    REQUIRE(outcome.rewrittenText.has_value());
    return *outcome.rewrittenText;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const fs::path kFixtures = fs::path(TSWEAVE_FIXTURE_DIR) / "convert";

// Export names before: static module.exports.NAME / exports.NAME targets.
// After: names declared by export statements.
std::set<std::string> cjs_export_names(const std::string& text) {
    js::Ast ast = js::parse_program(text);
    std::set<std::string> names;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        const js::Node& n = ast[id];
        if (n.kind != js::NodeKind::MemberExpr || n.has(js::kFlagComputed)) return;
        const js::Node& obj = ast[n.kids[0]];
        bool onExports =
            (obj.kind == js::NodeKind::Identifier && ast.token(obj.nameToken).text == "exports") ||
            (obj.kind == js::NodeKind::MemberExpr &&
             ast.token(obj.auxToken).text == "exports");
        if (onExports) names.insert(ast.token(n.auxToken).text);
    });
    return names;
}

std::set<std::string> esm_export_names(const std::string& text) {
    js::Ast ast = js::parse_program(text);
    std::set<std::string> names;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        const js::Node& n = ast[id];
        if (n.kind != js::NodeKind::ExportNamedDecl) return;
        for (js::NodeId kid : n.kids) {
            js::walk(ast, kid, [&](js::NodeId inner) {
                const js::Node& d = ast[inner];
                if (d.kind == js::NodeKind::Declarator && d.nameToken >= 0)
                    names.insert(ast.token(d.nameToken).text);
                if (d.kind == js::NodeKind::ExportSpecifier && d.auxToken >= 0)
                    names.insert(ast.token(d.auxToken).text);
            });
        }
    });
    return names;
}

bool free_of_commonjs(const std::string& text) {
    return text.find("require(") == std::string::npos &&
           text.find("module.exports") == std::string::npos;
}

}  // namespace

TEST_CASE("property exports become export var statements") {
    std::string in =
        "var x = 2;    // private\n"
        "\n"
        "module.exports.foo = 42;\n"
        "module.exports.f = (i) => i+x;\n";
    std::string expected =
        "var x = 2;    // private\n"
        "\n"
        "export var foo = 42;\n"
        "export var f = (i) => i+x;\n";
    CHECK(convert_text(in) == expected);
}

TEST_CASE("a namespace require with only static property reads becomes named imports") {
    std::string in =
        "var a = require('./a.js');\n"
        "\n"
        "console.log(a.foo);  // 42\n"
        "console.log(a.f(1)); // 3\n";
    std::string expected =
        "import {foo,f} from './a.js';\n"
        "\n"
        "console.log(foo);  // 42\n"
        "console.log(f(1)); // 3\n";
    CHECK(convert_text(in) == expected);
}

TEST_CASE("esm-only files pass through untouched") {
    auto outcome = convert_file(unit_of(
        "import {x} from './x.mjs';\n"
        "export var y = x + 1;\n"));
    CHECK(outcome.status == ConversionStatus::AlreadyEsm);
    CHECK_FALSE(outcome.rewrittenText.has_value());

    auto plain = convert_file(unit_of("var local = 1;\nfunction f() { return local; }\n"));
    CHECK(plain.status == ConversionStatus::AlreadyEsm);
}

TEST_CASE("computed specifiers are skipped as dynamic") {
    auto outcome = convert_file(unit_of("var m = require(pathVar);\n"));
    CHECK(outcome.status == ConversionStatus::SkippedDynamic);
    CHECK_FALSE(outcome.rewrittenText.has_value());
    REQUIRE(outcome.notes.size() == 1);
    CHECK(outcome.notes[0].find("computed specifier") != std::string::npos);
}

TEST_CASE("whole-object exports become a default export") {
    CHECK(convert_text("module.exports = function add(a, b) { return a + b; };\n") ==
          "export default function add(a, b) { return a + b; };\n");
    CHECK(convert_text("module.exports = { level: 3 };\n") ==
          "export default { level: 3 };\n");
}

TEST_CASE("destructured requires become named imports") {
    CHECK(convert_text("var {a, b} = require('./lib.js');\nuse(a, b);\n") ==
          "import {a,b} from './lib.js';\nuse(a, b);\n");
    CHECK(convert_text("const {parse: parseIt} = require('parser');\nparseIt();\n") ==
          "import {parse as parseIt} from 'parser';\nparseIt();\n");
}

TEST_CASE("bare require statements become side-effect imports") {
    CHECK(convert_text("require('./setup.js');\nvar ready = true;\n") ==
          "import './setup.js';\nvar ready = true;\n");
}

TEST_CASE("a module object that escapes keeps a namespace-style import") {
    CHECK(convert_text("var u = require('./u.js');\nu.f();\nsend(u);\n") ==
          "import u from './u.js';\nu.f();\nsend(u);\n");
}

TEST_CASE("writing through the module object blocks named imports") {
    CHECK(convert_text("var c = require('./c.js');\nc.count = 1;\nlog(c.count);\n") ==
          "import c from './c.js';\nc.count = 1;\nlog(c.count);\n");
}

TEST_CASE("name collisions fall back to a namespace-style import") {
    CHECK(convert_text("var a = require('./a.js');\nvar foo = 1;\nuse(a.foo, foo);\n") ==
          "import a from './a.js';\nvar foo = 1;\nuse(a.foo, foo);\n");

    // Two requires competing for the same property name: the first wins the
    // named form, the second backs off.
    CHECK(convert_text(
              "var a = require('./a.js');\nvar b = require('./b.js');\n"
              "go(a.item);\ngo(b.item);\n") ==
          "import {item} from './a.js';\nimport b from './b.js';\n"
          "go(item);\ngo(b.item);\n");
}

TEST_CASE("re-exporting an external module keeps its default") {
    auto outcome = convert_file(unit_of("module.exports = require('padder');\n"));
    REQUIRE(outcome.status == ConversionStatus::Converted);
    CHECK(*outcome.rewrittenText ==
          "export * from 'padder';\nexport {default} from 'padder';\n");
    REQUIRE(outcome.notes.size() == 1);
    CHECK(outcome.notes[0].find("default export is assumed") != std::string::npos);
    CHECK(outcome.reexported.empty());

    auto local = convert_file(unit_of("module.exports = require('./impl.js');\n"));
    REQUIRE(local.status == ConversionStatus::Converted);
    CHECK(*local.rewrittenText == "export * from './impl.js';\n");
    CHECK(local.reexported == std::vector<std::string>{"./impl.js"});
}

TEST_CASE("conditional and nested commonjs constructs are skipped") {
    auto conditional = convert_file(unit_of("if (flag) { module.exports.x = 1; }\n"));
    CHECK(conditional.status == ConversionStatus::SkippedDynamic);
    REQUIRE(conditional.notes.size() == 1);
    CHECK(conditional.notes[0].find("module.exports referenced at line 1") !=
          std::string::npos);

    auto nested = convert_file(unit_of("function load() { return require('./x.js'); }\n"));
    CHECK(nested.status == ConversionStatus::SkippedDynamic);
    CHECK(nested.notes[0].find("not a convertible statement") != std::string::npos);

    auto value = convert_file(unit_of("register(require);\n"));
    CHECK(value.status == ConversionStatus::SkippedDynamic);
    CHECK(value.notes[0].find("require used as a value") != std::string::npos);

    auto meta = convert_file(unit_of("log(module.id);\n"));
    CHECK(meta.status == ConversionStatus::SkippedDynamic);
    CHECK(meta.notes[0].find("module referenced") != std::string::npos);

    auto compound = convert_file(unit_of("module.exports.n += 1;\n"));
    CHECK(compound.status == ConversionStatus::SkippedDynamic);
}

TEST_CASE("exports.NAME is treated like module.exports.NAME") {
    CHECK(convert_text("exports.answer = 42;\n") == "export var answer = 42;\n");
}

TEST_CASE("mixed esm and commonjs files convert the commonjs half") {
    CHECK(convert_text("import fs from 'fs';\nmodule.exports.read = () => fs;\n") ==
          "import fs from 'fs';\nexport var read = () => fs;\n");
}

TEST_CASE("converted output never contains commonjs constructs") {
    std::vector<std::string> inputs = {
        "module.exports.a = 1;\nmodule.exports.b = 2;\n",
        "var dep = require('./dep.js');\nmodule.exports.go = () => dep.run();\n",
        "var {x} = require('./x.js');\nexports.twice = () => x + x;\n",
        "require('./effects.js');\nmodule.exports = () => 1;\n",
    };
    for (const auto& in : inputs) {
        std::string out = convert_text(in);
        CHECK(free_of_commonjs(out));
        CHECK_NOTHROW(js::parse_program(out));
    }
}

TEST_CASE("static property exports keep their exported names") {
    std::vector<std::string> inputs = {
        "module.exports.foo = 42;\nmodule.exports.f = (i) => i;\n",
        "exports.one = 1;\nexports.two = 2;\nexports.three = 3;\n",
        "var base = 10;\nmodule.exports.scale = (v) => v * base;\n",
    };
    for (const auto& in : inputs) {
        CHECK(cjs_export_names(in) == esm_export_names(convert_text(in)));
    }
}

TEST_CASE("converting a converted file changes nothing") {
    std::vector<std::string> inputs = {
        "module.exports.foo = 42;\n",
        "var a = require('./a.js');\nuse(a.thing);\n",
        "var {a} = require('m');\nuse(a);\n",
        "module.exports = class Engine {};\n",
    };
    for (const auto& in : inputs) {
        std::string once = convert_text(in);
        auto again = convert_file(unit_of(once));
        CHECK(again.status == ConversionStatus::AlreadyEsm);
    }
}

TEST_CASE("unparseable files fail without output") {
    SourceUnit broken;
    broken.relativePath = "bad.js";
    broken.text = "function ( {\n";
    broken.parsed = false;
    broken.parseError = "expected function name";
    auto outcome = convert_file(broken);
    CHECK(outcome.status == ConversionStatus::Failed);
    CHECK_FALSE(outcome.rewrittenText.has_value());
    REQUIRE(outcome.notes.size() == 1);
    CHECK(outcome.notes[0].find("parse error") != std::string::npos);
}

TEST_CASE("converted file names") {
    CHECK(converted_name("index.js") == "index.mjs");
    CHECK(converted_name("lib/a.js") == "lib/a.mjs");
    CHECK(converted_name("mod.mjs") == "mod.mjs");
    CHECK(converted_name("comp.jsx") == "comp.jsx");
}

TEST_CASE("converting the example pair produces the expected esm pair") {
    fs::path out = fs::temp_directory_path() / "tsweave-convert-fig";
    fs::remove_all(out);
    auto pkg = scan_package(kFixtures / "fig-pair", false);
    auto result = convert_package(pkg, out);

    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.outcomes[0].file == "a.js");
    CHECK(result.outcomes[0].status == ConversionStatus::Converted);
    CHECK(result.outcomes[1].file == "b.js");
    CHECK(result.outcomes[1].status == ConversionStatus::Converted);

    CHECK(read_file(out / "a.mjs") ==
          "var x = 2;    // private\n"
          "\n"
          "export var foo = 42;\n"
          "export var f = (i) => i+x;\n");
    CHECK(read_file(out / "b.mjs") ==
          "import {foo,f} from './a.mjs';\n"
          "\n"
          "console.log(foo);  // 42\n"
          "console.log(f(1)); // 3\n");
    CHECK_FALSE(fs::exists(out / "a.js"));
    CHECK_FALSE(fs::exists(out / "b.js"));
    CHECK(fs::exists(out / "package.json"));

    CHECK(result.package.moduleSystem == ModuleSystem::Esm);
    fs::remove_all(out);
}

TEST_CASE("an all-esm package copies byte for byte") {
    fs::path out = fs::temp_directory_path() / "tsweave-convert-esm";
    fs::remove_all(out);
    auto pkg = scan_package(kFixtures / "esm-pkg", false);
    auto result = convert_package(pkg, out);

    for (const auto& o : result.outcomes) CHECK(o.status == ConversionStatus::AlreadyEsm);
    for (const auto& entry : fs::recursive_directory_iterator(kFixtures / "esm-pkg")) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), kFixtures / "esm-pkg");
        CHECK(read_file(out / rel) == read_file(entry.path()));
    }
    fs::remove_all(out);
}

TEST_CASE("converting a converted package changes nothing") {
    fs::path first = fs::temp_directory_path() / "tsweave-convert-once";
    fs::path second = fs::temp_directory_path() / "tsweave-convert-twice";
    fs::remove_all(first);
    fs::remove_all(second);

    auto pkg = scan_package(kFixtures / "fig-pair", false);
    auto onceResult = convert_package(pkg, first);
    auto twiceResult = convert_package(onceResult.package, second);

    for (const auto& o : twiceResult.outcomes)
        CHECK(o.status == ConversionStatus::AlreadyEsm);
    for (const auto& entry : fs::recursive_directory_iterator(first)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), first);
        CHECK(read_file(second / rel) == read_file(entry.path()));
    }
    fs::remove_all(first);
    fs::remove_all(second);
}

TEST_CASE("a dynamic file is copied verbatim while its siblings convert") {
    fs::path out = fs::temp_directory_path() / "tsweave-convert-mixed";
    fs::remove_all(out);
    auto pkg = scan_package(kFixtures / "mixed-pkg", false);
    auto result = convert_package(pkg, out);

    REQUIRE(result.outcomes.size() == 3);
    CHECK(result.outcomes[0].file == "index.js");
    CHECK(result.outcomes[0].status == ConversionStatus::SkippedDynamic);
    CHECK(result.outcomes[1].file == "lib/extra.js");
    CHECK(result.outcomes[1].status == ConversionStatus::Converted);
    CHECK(result.outcomes[2].file == "lib/helper.js");
    CHECK(result.outcomes[2].status == ConversionStatus::Converted);

    CHECK(read_file(out / "index.js") == read_file(kFixtures / "mixed-pkg/index.js"));
    CHECK(read_file(out / "lib/helper.mjs") ==
          "export var transform = function (value) {\n"
          "  return String(value).trim();\n"
          "};\n");
    CHECK(read_file(out / "lib/extra.mjs") ==
          "import {transform} from './helper.mjs';\n"
          "\n"
          "export var shout = function (value) {\n"
          "  return transform(value).toUpperCase();\n"
          "};\n");
    fs::remove_all(out);
}

TEST_CASE("local re-export chains regain their default export") {
    fs::path out = fs::temp_directory_path() / "tsweave-convert-chain";
    fs::remove_all(out);
    auto pkg = scan_package(kFixtures / "chain-pkg", false);
    auto result = convert_package(pkg, out);

    CHECK(read_file(out / "impl.mjs") ==
          "export default function work(input) {\n"
          "  return input * 2;\n"
          "};\n"
          "export var version = 3;\n");
    CHECK(read_file(out / "index.mjs") ==
          "export * from './impl.mjs';\n"
          "export {default} from './impl.mjs';\n");
    fs::remove_all(out);
}

TEST_CASE("conversion records are one json object per file") {
    ConversionOutcome outcome;
    outcome.file = "lib/a.js";
    outcome.status = ConversionStatus::SkippedDynamic;
    outcome.notes = {"require with a computed specifier at line 3"};
    auto record = nlohmann::json::parse(conversion_record(outcome));
    CHECK(record["file"] == "lib/a.js");
    CHECK(record["status"] == "skipped-dynamic");
    CHECK(record["notes"][0] == "require with a computed specifier at line 3");
}
