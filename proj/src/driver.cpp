#include "stublint/driver.hpp"

#include "stublint/arity_check.hpp"
#include "stublint/c_ast.hpp"
#include "stublint/c_lexer.hpp"
#include "stublint/cfg.hpp"
#include "stublint/harness_gen.hpp"
#include "stublint/header_gen.hpp"
#include "stublint/lock_analysis.hpp"
#include "stublint/naked_const.hpp"
#include "stublint/sarif.hpp"
#include "stublint/value_safety.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

namespace stublint {

std::size_t AnalysisResult::count(Severity s) const {
    return static_cast<std::size_t>(
        std::count_if(diagnostics.begin(), diagnostics.end(), [s](const Diagnostic& d) { return d.severity == s; }));
}

namespace {

void append(std::vector<Diagnostic>& into, std::vector<Diagnostic> from) {
    into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

std::vector<ExternalDecl> dedupe_decls(std::vector<ExternalDecl> decls) {
    std::vector<ExternalDecl> out;
    std::set<std::tuple<std::string, std::string, std::optional<std::string>, int>> seen;
    for (auto& d : decls) {
        if (seen.emplace(d.ocaml_name, d.byte_name, d.native_name, d.arity).second) {
            out.push_back(std::move(d));
        }
    }
    return out;
}

void analyze_function(const StubFunction& fn, const std::string& file, const Summaries& summaries,
                      std::vector<Diagnostic>& out) {
    Cfg cfg = build_cfg(fn, summaries);
    LockMap locks = solve(cfg, summaries);
    append(out, lock_diagnostics(cfg, locks, summaries, file));
    ValueTrack track = track_values(cfg, locks, summaries, file);
    append(out, std::move(track.notes));
    append(out, check_deref_safety(track.events, file));
    append(out, check_camlparam(fn, file));
    append(out, check_naked(cfg, propagate_constants(cfg), file));
}

} // namespace

AnalysisResult analyze(const std::vector<SourceFile>& ml_inputs, const std::vector<SourceFile>& c_inputs,
                       const Summaries& summaries, const AnalysisOptions& options) {
    AnalysisResult result;
    std::vector<Diagnostic> diags;

    std::vector<ExternalDecl> all_decls;
    for (const auto& f : ml_inputs) {
        MlParseResult parsed = parse_ml_externals(f.text, f.path);
        for (const auto& issue : parsed.issues) {
            diags.push_back(make_diag(RuleId::UnsupportedConstruct, Severity::Error, issue.loc, issue.message));
            result.fatal = true;
        }
        all_decls.insert(all_decls.end(), parsed.decls.begin(), parsed.decls.end());
    }
    result.decls = dedupe_decls(std::move(all_decls));
    for (const auto& d : result.decls) {
        append(diags, prototypes_for(d).diagnostics);
    }

    std::vector<StubUnit> units;
    units.reserve(c_inputs.size());
    for (const auto& f : c_inputs) {
        try {
            units.push_back(parse_unit(f.text, f.path));
        } catch (const CParseError& e) {
            diags.push_back(make_diag(RuleId::UnsupportedConstruct, Severity::Error,
                                      SourceLoc{f.path, e.line(), e.column()}, e.what()));
            result.fatal = true;
        }
    }

    Summaries table = summaries;
    for (const auto& unit : units) {
        for (const auto& fn : unit.functions) {
            if (fn.is_camlprim && !table.has_exact(fn.name)) {
                SummaryEntry e;
                e.pattern = fn.name;
                e.effects = static_cast<unsigned>(Effect::RequiresLock) | static_cast<unsigned>(Effect::MayGc);
                table.add(e);
            }
        }
    }

    std::vector<const StubUnit*> unit_ptrs;
    for (const auto& unit : units) {
        unit_ptrs.push_back(&unit);
        for (const auto& d : unit.diagnostics) {
            if (d.rule == RuleId::UnsupportedConstruct && d.severity == Severity::Error) {
                result.fatal = true;
            }
        }
        append(diags, unit.diagnostics);
        if (unit.fatal) {
            diags.push_back(*unit.fatal);
            result.fatal = true;
        }
        for (const auto& fn : unit.functions) {
            analyze_function(fn, unit.file, table, diags);
        }
    }
    append(diags, check_arity(result.decls, unit_ptrs));

    std::erase_if(diags, [&](const Diagnostic& d) { return options.disabled.count(d.rule) != 0; });
    sort_diagnostics(diags);
    diags.erase(std::unique(diags.begin(), diags.end()), diags.end());
    result.diagnostics = std::move(diags);
    return result;
}

int exit_status(const AnalysisResult& result, bool strict) {
    if (result.fatal) {
        return 2;
    }
    if (result.count(Severity::Error) > 0 || (strict && result.count(Severity::Warning) > 0)) {
        return 1;
    }
    return 0;
}

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) {
        throw IoError("cannot write '" + path + "'");
    }
}

bool is_ml_path(const std::string& p) {
    auto ext = std::filesystem::path(p).extension();
    return ext == ".ml" || ext == ".mli";
}

bool is_c_path(const std::string& p) {
    auto ext = std::filesystem::path(p).extension();
    return ext == ".c" || ext == ".h";
}

std::vector<ExternalDecl> read_decls(const std::string& path, std::ostream& err, bool& ok) {
    MlParseResult parsed = parse_ml_externals(read_file(path), path);
    for (const auto& issue : parsed.issues) {
        err << format_text(make_diag(RuleId::UnsupportedConstruct, Severity::Error, issue.loc, issue.message))
            << "\n";
    }
    ok = parsed.issues.empty();
    auto decls = dedupe_decls(std::move(parsed.decls));
    for (const auto& d : decls) {
        for (const auto& diag : prototypes_for(d).diagnostics) {
            err << format_text(diag) << "\n";
        }
    }
    return decls;
}

Summaries load_table(const std::string& flag_path, std::ostream& err, bool& ok) {
    Summaries table = Summaries::defaults();
    std::string path = flag_path;
    if (path.empty()) {
        if (!std::filesystem::exists("stublint-summaries.txt")) {
            return table;
        }
        path = "stublint-summaries.txt";
    }
    std::string text = read_file(path);
    try {
        table.add(load_summaries(text));
    } catch (const SummaryLoadError& e) {
        std::string msg = e.what();
        msg = msg.substr(msg.find(": ") + 2);
        err << path << ":" << e.line() << ": error: " << msg << "\n";
        ok = false;
    }
    return table;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Static checker for OCaml C stubs", "stublint"};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string header_out;
    std::string harness_out;
    std::string sarif_out;
    std::string summaries_path;
    bool strict = false;
    std::vector<std::string> rule_flags;
    auto* check = app.add_subcommand("check", "Analyze OCaml declarations and C stubs");
    check->add_option("files", files, ".ml, .mli and .c inputs")->required();
    check->add_option("--header-out", header_out, "Also write the generated header");
    check->add_option("--harness-out", harness_out, "Also write the generated harness");
    check->add_option("--sarif", sarif_out, "Write a SARIF 2.1.0 log");
    check->add_option("--summaries", summaries_path, "Function summary file")->check(CLI::ExistingFile);
    check->add_flag("--strict", strict, "Warnings also fail the check");
    check->add_option("--rule", rule_flags, "Disable a rule: ID=off")->take_all();

    std::string gen_input;
    std::string gen_output;
    auto* header = app.add_subcommand("header", "Print C prototypes for the externals of an OCaml file");
    header->add_option("input", gen_input, "OCaml source")->required();
    header->add_option("-o,--output", gen_output, "Output file");
    auto* harness = app.add_subcommand("harness", "Print an analysis harness calling every primitive");
    harness->add_option("input", gen_input, "OCaml source")->required();
    harness->add_option("-o,--output", gen_output, "Output file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (header->parsed() || harness->parsed()) {
            bool ok = true;
            auto decls = read_decls(gen_input, err, ok);
            write_output(gen_output, header->parsed() ? render_header(decls) : generate_main(decls), out);
            return ok ? 0 : 2;
        }

        AnalysisOptions options;
        for (const auto& flag : rule_flags) {
            auto eq = flag.find('=');
            auto rule = rule_from_string(flag.substr(0, eq));
            if (eq == std::string::npos || !rule || flag.substr(eq + 1) != "off") {
                err << "stublint: invalid --rule '" << flag << "', expected ID=off\n";
                return 2;
            }
            options.disabled.insert(*rule);
        }

        bool ok = true;
        Summaries table = load_table(summaries_path, err, ok);
        if (!ok) {
            return 2;
        }

        std::vector<SourceFile> ml;
        std::vector<SourceFile> c;
        for (const auto& f : files) {
            if (is_ml_path(f)) {
                ml.push_back({f, read_file(f)});
            } else if (is_c_path(f)) {
                c.push_back({f, read_file(f)});
            } else {
                err << "stublint: '" << f << "' is neither an OCaml (.ml, .mli) nor a C (.c, .h) file\n";
                return 2;
            }
        }

        AnalysisResult result = analyze(ml, c, table, options);
        for (const auto& d : result.diagnostics) {
            out << format_text(d) << "\n";
        }
        if (!header_out.empty()) {
            write_output(header_out, render_header(result.decls), out);
        }
        if (!harness_out.empty()) {
            write_output(harness_out, generate_main(result.decls), out);
        }
        if (!sarif_out.empty()) {
            write_output(sarif_out, emit_sarif(result.diagnostics), out);
        }
        err << result.count(Severity::Error) << " error(s), " << result.count(Severity::Warning)
            << " warning(s), " << result.count(Severity::Note) << " note(s)\n";
        return exit_status(result, strict);
    } catch (const IoError& e) {
        err << "stublint: " << e.what() << "\n";
        return 2;
    }
}

} // namespace stublint
