#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsweave/project.hpp"

namespace tsweave {

enum class ConversionStatus {
    Converted,
    AlreadyEsm,
    SkippedDynamic,
    Failed,
};

std::string_view to_string(ConversionStatus status);

struct ConversionOutcome {
    std::string file;
    ConversionStatus status = ConversionStatus::AlreadyEsm;
    // Present only when status is Converted (or AlreadyEsm after a
    // package-level specifier update). Absent means the original text stands.
    std::optional<std::string> rewrittenText;
    std::vector<std::string> notes;
    // Specifiers of `module.exports = require(...)` chains that became
    // `export * from ...`. Relative ones may need a default re-export added
    // once the target file's own conversion is known.
    std::vector<std::string> reexported;
};

// Rewrites the CommonJS constructs of one parsed file to ECMAScript module
// syntax. Handled forms, all at top level only:
//   module.exports.NAME = EXPR   ->  export var NAME = EXPR
//   exports.NAME = EXPR          ->  export var NAME = EXPR
//   module.exports = EXPR        ->  export default EXPR
//   module.exports = require(M)  ->  export * from M (and the default, see
//                                    the package pass)
//   var X = require('m')         ->  import {a,b} from 'm' when every use of
//                                    X is a static property access, else
//                                    import X from 'm'
//   var {a, b: c} = require('m') ->  import {a, b as c} from 'm'
//   require('m');                ->  import 'm';
// Any other use of `require`, `module`, or `exports` marks the whole file
// skipped-dynamic and the original text is kept.
ConversionOutcome convert_file(const SourceUnit& unit);

// Output name for a converted file: .js becomes .mjs, everything else keeps
// its name.
std::string converted_name(const std::string& relativePath);

struct ConvertPackageResult {
    std::filesystem::path outDir;
    PackageUnit package;
    std::vector<ConversionOutcome> outcomes;
};

// Converts every source file of the package into a sibling tree at outDir.
// Non-source files, skipped files, and node_modules are copied verbatim, so
// the original tree stays usable for before/after comparison. Import
// specifiers that point at renamed local files are updated afterwards, once
// all per-file outcomes are known.
ConvertPackageResult convert_package(const PackageUnit& pkg,
                                     const std::filesystem::path& outDir);

// One line-delimited JSON record for a conversion outcome.
std::string conversion_record(const ConversionOutcome& outcome);

}  // namespace tsweave
