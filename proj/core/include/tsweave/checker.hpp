#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsweave {

class CompilerNotFound : public std::runtime_error {
  public:
    explicit CompilerNotFound(const std::string& msg) : std::runtime_error(msg) {}
};

// The required flags, in order. `--moduleResolution node` and
// `--lib es2021,dom` each split into two argv entries when the compiler is
// invoked.
std::vector<std::string> default_compile_flags();

struct CompileConfig {
    std::vector<std::string> flags = default_compile_flags();
    // Empty means: $TSWEAVE_TSC if set, otherwise `tsc` from PATH.
    std::filesystem::path compilerPath;
    std::chrono::seconds timeout{120};
};

struct Diagnostic {
    // Relative to the checked package; empty for global diagnostics such as
    // configuration errors.
    std::string file;
    size_t line = 0;
    size_t column = 0;
    std::string code;
    std::string message;
};

struct CheckResult {
    std::string package;
    std::vector<Diagnostic> diagnostics;
    size_t filesChecked = 0;
    size_t errorFreeFiles = 0;
    bool typeChecks = false;
    bool timedOut = false;
    std::optional<std::filesystem::path> declarationsDir;
    std::string compilerVersion;
    // Compiler output lines that are not diagnostics, kept for debugging.
    std::vector<std::string> rawLog;
};

// Parses the compiler's plain (non-pretty) diagnostic format. Lines shaped
// `path(line,col): error TScode: message` become diagnostics, indented lines
// continue the previous message, and everything else lands in `unmatched`.
std::vector<Diagnostic> parse_diagnostics(const std::string& output,
                                          std::vector<std::string>* unmatched = nullptr);

// The compiler executable that a config resolves to.
std::filesystem::path resolve_compiler(const CompileConfig& config);

// Runs `tsc --version` and returns the reported version string.
std::string compiler_version(const CompileConfig& config);

// Type checks every .ts/.mts file under pkgDir (node_modules and dot
// directories excluded) in one compiler run. A package full of type errors
// is a normal result, not an exception; only a missing compiler throws.
CheckResult type_check(const std::filesystem::path& pkgDir, const CompileConfig& config = {});

// Same compiler run, but with declaration emission in place of --noEmit.
// Declarations land in `.declarations` under pkgDir and are produced even
// when parts of the package have type errors.
CheckResult emit_declarations(const std::filesystem::path& pkgDir,
                              const CompileConfig& config = {});

// One line-delimited JSON record for a check result.
std::string check_record(const CheckResult& result);

}  // namespace tsweave
