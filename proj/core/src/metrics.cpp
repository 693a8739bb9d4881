#include "tsweave/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tsweave/ast.hpp"
#include "tsweave/lexer.hpp"
#include "tsweave/type_parser.hpp"

namespace tsweave {

namespace {

std::string normalize_ws(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending = true;
            continue;
        }
        if (pending && !out.empty()) out += ' ';
        pending = false;
        out += c;
    }
    return out;
}

bool all_closing_angles(const std::string& text) {
    return !text.empty() && text.find_first_not_of('>') == std::string::npos;
}

// Reads declaration files token by token. Only top-level function shapes are
// lifted; everything else (namespaces, interfaces, classes, type aliases,
// imports) is skipped statement by statement.
class SignatureScanner {
  public:
    explicit SignatureScanner(const js::TokenFile& file) : toks(file.tokens), text(file.text) {}

    std::vector<SignatureRecord> run() {
        while (!eof()) scan_statement();
        return out;
    }

  private:
    const std::vector<js::Token>& toks;
    const std::string& text;
    std::vector<SignatureRecord> out;
    size_t i = 0;

    bool eof() const { return i >= toks.size(); }
    const js::Token& cur() const { return toks[i]; }
    bool at(std::string_view t) const { return !eof() && cur().text == t; }
    bool at_word(std::string_view t) const {
        return !eof() && (cur().is(js::TokenKind::Identifier) || cur().is(js::TokenKind::Keyword)) &&
               cur().text == t;
    }

    std::string slice(size_t first, size_t end) const {
        if (first >= end || end > toks.size()) return "";
        size_t from = toks[first].offset;
        size_t to = toks[end - 1].offset + toks[end - 1].text.size();
        return normalize_ws(std::string_view(text).substr(from, to - from));
    }

    // Skips one bracketed group, `(`/`[`/`{` included.
    void skip_balanced() {
        std::vector<char> stack;
        do {
            const std::string& t = cur().text;
            if (t == "(" || t == "[" || t == "{")
                stack.push_back(t[0]);
            else if (t == ")" || t == "]" || t == "}")
                if (!stack.empty()) stack.pop_back();
            ++i;
        } while (!eof() && !stack.empty());
    }

    // Skips `<...>` starting at a `<` token; tolerates `>>`-style closers.
    void skip_angles() {
        int depth = 0;
        while (!eof()) {
            const std::string& t = cur().text;
            if (t == "<")
                ++depth;
            else if (all_closing_angles(t))
                depth -= static_cast<int>(t.size());
            else if (t == "(" || t == "[" || t == "{") {
                skip_balanced();
                continue;
            }
            ++i;
            if (depth <= 0) break;
        }
    }

    void skip_statement() {
        while (!eof()) {
            const std::string& t = cur().text;
            if (t == ";") {
                ++i;
                return;
            }
            if (t == "{") {
                skip_balanced();
                return;
            }
            if (t == "(" || t == "[") {
                skip_balanced();
                continue;
            }
            ++i;
        }
    }

    void scan_statement() {
        size_t start = i;
        while (at_word("export") || at_word("default") || at_word("declare") ||
               at_word("abstract") || at_word("async"))
            ++i;

        if (at_word("function")) {
            ++i;
            if (!scan_function()) {
                i = start;
                skip_statement();
            }
            return;
        }
        if (at_word("const") || at_word("var") || at_word("let")) {
            ++i;
            if (!scan_typed_binding()) {
                i = start;
                skip_statement();
            }
            return;
        }
        if (at_word("namespace") || at_word("module") || at_word("interface") ||
            at_word("class") || at_word("enum")) {
            while (!eof() && cur().text != "{" && cur().text != ";") ++i;
            if (at("{"))
                skip_balanced();
            else if (at(";"))
                ++i;
            return;
        }
        i = start;
        skip_statement();
    }

    bool scan_function() {
        SignatureRecord sig;
        if (!eof() && (cur().is(js::TokenKind::Identifier) || cur().is(js::TokenKind::Keyword)) &&
            cur().text != "(") {
            sig.functionName = cur().text;
            ++i;
        } else {
            sig.functionName = "default";
        }
        if (at("<")) skip_angles();
        if (!at("(")) return false;
        if (!scan_params(sig)) return false;
        if (at(":")) {
            ++i;
            int end = ts::parse_type_tokens(toks, static_cast<int>(i));
            if (end < 0) return false;
            sig.returnType = slice(i, static_cast<size_t>(end));
            i = static_cast<size_t>(end);
        }
        if (at(";")) ++i;
        out.push_back(std::move(sig));
        return true;
    }

    bool scan_typed_binding() {
        if (eof() || !cur().is(js::TokenKind::Identifier)) return false;
        std::string name = cur().text;
        ++i;
        if (!at(":")) return false;
        ++i;
        size_t typeStart = i;
        int typeEnd = ts::parse_type_tokens(toks, static_cast<int>(i));
        if (typeEnd < 0) return false;
        i = static_cast<size_t>(typeEnd);
        if (at(";")) ++i;

        // Only function-typed bindings become signatures: `<T>(...) => R` or
        // `(...) => R` at the top of the type.
        size_t p = typeStart;
        if (toks[p].text == "<") {
            size_t save = i;
            i = p;
            skip_angles();
            p = i;
            i = save;
        }
        if (p >= static_cast<size_t>(typeEnd) || toks[p].text != "(") return true;
        size_t close = matching_paren(p);
        if (close == 0 || close + 1 >= static_cast<size_t>(typeEnd) ||
            toks[close + 1].text != "=>")
            return true;

        SignatureRecord sig;
        sig.functionName = std::move(name);
        parse_param_list(p, close, sig);
        sig.returnType = slice(close + 2, static_cast<size_t>(typeEnd));
        out.push_back(std::move(sig));
        return true;
    }

    size_t matching_paren(size_t open) const {
        int depth = 0;
        for (size_t k = open; k < toks.size(); ++k) {
            if (toks[k].text == "(") ++depth;
            if (toks[k].text == ")" && --depth == 0) return k;
        }
        return 0;
    }

    bool scan_params(SignatureRecord& sig) {
        size_t open = i;
        size_t close = matching_paren(open);
        if (close == 0) return false;
        parse_param_list(open, close, sig);
        i = close + 1;
        return true;
    }

    // Tokens (open, close) exclusive, split on top-level commas. Each entry
    // is `[...]name[?][: type]`; optionality and rest markers are dropped.
    void parse_param_list(size_t open, size_t close, SignatureRecord& sig) {
        size_t entry = open + 1;
        int paren = 0, angle = 0;
        for (size_t k = open + 1; k <= close; ++k) {
            const std::string& t = toks[k].text;
            if (k < close) {
                if (t == "(" || t == "[" || t == "{") ++paren;
                if (t == ")" || t == "]" || t == "}") --paren;
                if (t == "<") ++angle;
                if (all_closing_angles(t)) angle -= static_cast<int>(t.size());
            }
            if ((k == close || (t == "," && paren == 0 && angle <= 0)) && k > entry) {
                add_param(entry, k, sig);
                entry = k + 1;
            }
        }
    }

    void add_param(size_t first, size_t end, SignatureRecord& sig) {
        size_t nameFirst = first;
        if (toks[nameFirst].text == "...") ++nameFirst;
        size_t colon = end;
        int depth = 0;
        for (size_t k = nameFirst; k < end; ++k) {
            const std::string& t = toks[k].text;
            if (t == "(" || t == "[" || t == "{") ++depth;
            if (t == ")" || t == "]" || t == "}") --depth;
            if (t == ":" && depth == 0) {
                colon = k;
                break;
            }
        }
        size_t nameEnd = colon;
        if (nameEnd > nameFirst && toks[nameEnd - 1].text == "?") --nameEnd;
        std::string name = slice(nameFirst, nameEnd);
        std::string type = colon < end ? slice(colon + 1, end) : "any";
        sig.paramTypes.emplace_back(std::move(name), std::move(type));
    }
};

std::optional<double> ratio(size_t numerator, size_t denominator) {
    if (denominator == 0) return std::nullopt;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::string stripped_of_ws(const std::string& type) {
    std::string out;
    for (char c : type)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

}  // namespace

std::vector<SignatureRecord> extract_signatures(const std::string& declarationText) {
    js::TokenFile lexed;
    try {
        lexed = js::lex(declarationText);
    } catch (const js::LexError&) {
        return {};
    }
    return SignatureScanner(lexed).run();
}

AccuracyCount& AccuracyCount::operator+=(const AccuracyCount& other) {
    compared += other.compared;
    matched += other.matched;
    skippedAnyGroundTruth += other.skippedAnyGroundTruth;
    skippedAbsent += other.skippedAbsent;
    arityMismatches += other.arityMismatches;
    return *this;
}

AccuracyCount compare_signatures(const std::vector<SignatureRecord>& groundTruth,
                                 const std::vector<SignatureRecord>& generated) {
    auto first_by_name = [](const std::vector<SignatureRecord>& list) {
        std::map<std::string, const SignatureRecord*> byName;
        for (const auto& sig : list) byName.emplace(sig.functionName, &sig);
        return byName;
    };
    auto gtByName = first_by_name(groundTruth);
    auto genByName = first_by_name(generated);

    AccuracyCount acc;
    auto compare_pair = [&acc](const std::string& gtType, const std::string& genType) {
        if (gtType == "any") {
            ++acc.skippedAnyGroundTruth;
            return;
        }
        ++acc.compared;
        if (gtType == genType) ++acc.matched;
    };

    for (const auto& [name, gtSig] : gtByName) {
        auto it = genByName.find(name);
        if (it == genByName.end()) {
            ++acc.skippedAbsent;
            continue;
        }
        const SignatureRecord* genSig = it->second;
        size_t common = std::min(gtSig->paramTypes.size(), genSig->paramTypes.size());
        if (gtSig->paramTypes.size() != genSig->paramTypes.size()) ++acc.arityMismatches;
        for (size_t k = 0; k < common; ++k)
            compare_pair(gtSig->paramTypes[k].second, genSig->paramTypes[k].second);
        if (gtSig->returnType) {
            if (*gtSig->returnType == "any")
                ++acc.skippedAnyGroundTruth;
            else {
                ++acc.compared;
                if (genSig->returnType && *genSig->returnType == *gtSig->returnType)
                    ++acc.matched;
            }
        }
    }
    for (const auto& [name, sig] : genByName) {
        (void)sig;
        if (!gtByName.count(name)) ++acc.skippedAbsent;
    }
    return acc;
}

std::vector<std::string> annotation_texts(const SourceUnit& unit) {
    if (!unit.parsed) return {};
    std::vector<std::pair<int, int>> ranges;
    js::walk(unit.ast, unit.ast.root, [&](js::NodeId id) {
        const js::Node& n = unit.ast[id];
        if (n.typeColon >= 0) ranges.emplace_back(n.typeColon, n.typeEnd);
    });
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::string> out;
    out.reserve(ranges.size());
    for (auto [colon, end] : ranges) out.push_back(normalize_ws(unit.ast.text_of(colon + 1, end)));
    return out;
}

bool is_trivial_annotation(const std::string& type) {
    std::string bare = stripped_of_ws(type);
    return bare == "any" || bare == "any[]" || bare == "Function";
}

AnnotationTally count_annotations(const PackageUnit& wovenPkg, bool errorFreeOnly,
                                  const CheckResult& check) {
    std::set<std::string> filesWithErrors;
    for (const auto& d : check.diagnostics)
        if (!d.file.empty()) filesWithErrors.insert(d.file);

    AnnotationTally tally;
    for (const auto& file : wovenPkg.files) {
        if (errorFreeOnly && filesWithErrors.count(file.relativePath)) continue;
        for (const auto& type : annotation_texts(file)) {
            ++tally.total;
            if (is_trivial_annotation(type)) ++tally.trivial;
        }
    }
    return tally;
}

std::optional<double> trivial_annotation_ratio(const PackageUnit& wovenPkg, bool errorFreeOnly,
                                               const CheckResult& check) {
    AnnotationTally tally = count_annotations(wovenPkg, errorFreeOnly, check);
    return ratio(tally.trivial, tally.total);
}

std::map<std::string, size_t> error_code_histogram(const std::vector<CheckResult>& results) {
    std::map<std::string, size_t> histogram;
    for (const auto& result : results)
        for (const auto& d : result.diagnostics) ++histogram[d.code];
    return histogram;
}

std::vector<HistogramRow> top_error_codes(const std::map<std::string, size_t>& histogram,
                                          size_t top) {
    std::vector<HistogramRow> rows;
    rows.reserve(histogram.size());
    for (const auto& [code, count] : histogram) rows.push_back({code, count});
    std::sort(rows.begin(), rows.end(), [](const HistogramRow& a, const HistogramRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.code < b.code;
    });

    size_t other = 0;
    if (rows.size() > top) {
        for (size_t k = top; k < rows.size(); ++k) other += rows[k].count;
        rows.resize(top);
    }
    rows.push_back({"Other", other});
    return rows;
}

std::vector<EcdfPoint> error_ecdf(const std::vector<size_t>& errorCounts) {
    if (errorCounts.empty()) return {};
    std::vector<size_t> sorted = errorCounts;
    std::sort(sorted.begin(), sorted.end());
    std::vector<EcdfPoint> points;
    double n = static_cast<double>(sorted.size());
    for (size_t k = 0; k < sorted.size(); ++k) {
        if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
        points.push_back({sorted[k], static_cast<double>(k + 1) / n});
    }
    return points;
}

std::optional<double> type_check_rate(const CategoryRollup& rollup) {
    size_t denominator = rollup.migrated >= rollup.timedOut ? rollup.migrated - rollup.timedOut : 0;
    return ratio(rollup.typeChecking, denominator);
}

std::optional<double> error_free_file_rate(const CategoryRollup& rollup) {
    return ratio(rollup.errorFreeFiles, rollup.totalFiles);
}

std::optional<double> trivial_ratio(const CategoryRollup& rollup) {
    return ratio(rollup.trivialAnnotations, rollup.totalAnnotations);
}

std::optional<double> accuracy_rate(const CategoryRollup& rollup) {
    return ratio(rollup.accuracy.matched, rollup.accuracy.compared);
}

MigrationReport build_report(std::vector<PackageReport> packages) {
    std::sort(packages.begin(), packages.end(),
              [](const PackageReport& a, const PackageReport& b) { return a.name < b.name; });

    MigrationReport report;
    std::vector<size_t> checkedErrorCounts;
    for (const auto& p : packages) {
        for (CategoryRollup* rollup : {&report.byCategory[p.category], &report.overall}) {
            ++rollup->packages;
            if (p.migrated) ++rollup->migrated;
            if (p.timedOut) ++rollup->timedOut;
            if (p.typeChecks) ++rollup->typeChecking;
            rollup->totalFiles += p.totalFiles;
            rollup->errorFreeFiles += p.errorFreeFiles;
            rollup->errorCount += p.errorCount;
            rollup->totalAnnotations += p.totalAnnotations;
            rollup->trivialAnnotations += p.trivialAnnotations;
            if (p.accuracy) rollup->accuracy += *p.accuracy;
        }
        for (const auto& [code, count] : p.errorCodeHistogram)
            report.errorCodeHistogram[code] += count;
        if (p.migrated && !p.timedOut) checkedErrorCounts.push_back(p.errorCount);
    }
    report.ecdf = error_ecdf(checkedErrorCounts);
    report.packages = std::move(packages);
    return report;
}

BeforeAfterComparison before_after_compare(const MigrationReport& before,
                                           const MigrationReport& after) {
    auto names_of = [](const MigrationReport& r) {
        std::set<std::string> names;
        for (const auto& p : r.packages) names.insert(p.name);
        return names;
    };
    std::set<std::string> beforeNames = names_of(before);
    std::set<std::string> afterNames = names_of(after);
    if (beforeNames != afterNames) {
        std::vector<std::string> onlyOne;
        std::set_symmetric_difference(beforeNames.begin(), beforeNames.end(), afterNames.begin(),
                                      afterNames.end(), std::back_inserter(onlyOne));
        throw PackageSetMismatch("reports cover different package sets; first difference: " +
                                 onlyOne.front());
    }

    BeforeAfterComparison cmp;
    auto add_row = [&cmp](const std::string& label, const CategoryRollup* b,
                          const CategoryRollup* a) {
        static const CategoryRollup empty;
        if (!b) b = &empty;
        if (!a) a = &empty;
        cmp.rows.push_back({label, type_check_rate(*b), type_check_rate(*a),
                            error_free_file_rate(*b), error_free_file_rate(*a),
                            accuracy_rate(*b), accuracy_rate(*a)});
    };
    for (PackageCategory category :
         {PackageCategory::DefinitelyTypedNoDeps, PackageCategory::DefinitelyTypedWithDeps,
          PackageCategory::NeverTypedNoDeps, PackageCategory::NeverTypedWithDeps}) {
        auto b = before.byCategory.find(category);
        auto a = after.byCategory.find(category);
        if (b == before.byCategory.end() && a == after.byCategory.end()) continue;
        add_row(to_string(category), b == before.byCategory.end() ? nullptr : &b->second,
                a == after.byCategory.end() ? nullptr : &a->second);
    }
    add_row("Overall", &before.overall, &after.overall);

    std::map<std::string, bool> beforeChecks;
    for (const auto& p : before.packages) beforeChecks[p.name] = p.typeChecks;
    for (const auto& p : after.packages) {
        bool b = beforeChecks[p.name];
        bool a = p.typeChecks;
        auto& bucket = b && a    ? cmp.typeChecksBoth
                       : b && !a ? cmp.typeChecksBeforeOnly
                       : !b && a ? cmp.typeChecksAfterOnly
                                 : cmp.typeChecksNeither;
        bucket.push_back(p.name);
    }
    return cmp;
}

}  // namespace tsweave
