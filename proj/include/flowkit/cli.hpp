#pragma once

// Command-line front end.  run_cli() is the whole program; the binary in
// tools/ just forwards argv, which lets tests drive every code path
// in-process with string streams.
//
// Exit codes: 0 = success (warnings allowed), 1 = the model has error
// diagnostics, 2 = usage, I/O, scenario, or rendering problems.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowkit/core.hpp"
#include "flowkit/corpus.hpp"
#include "flowkit/dsl.hpp"
#include "flowkit/render.hpp"
#include "flowkit/sim.hpp"
#include "flowkit/validate.hpp"

namespace flowkit {

namespace cli_detail {

inline bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

inline bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

struct Palette {
  const char* error = "";
  const char* warning = "";
  const char* reset = "";
};

// Color only on a real terminal, and only when NO_COLOR is unset.
inline Palette palette_for(const std::ostream& out) {
  Palette p;
  if (&out != &std::cout) return p;
  if (std::getenv("NO_COLOR") != nullptr) return p;
  if (!::isatty(::fileno(stdout))) return p;
  p.error = "\x1b[31m";
  p.warning = "\x1b[33m";
  p.reset = "\x1b[0m";
  return p;
}

inline void print_parse_diags(const std::string& file, const std::vector<ParseDiagnostic>& diags,
                              std::ostream& out) {
  Palette p = palette_for(out);
  for (const ParseDiagnostic& d : diags)
    out << file << ":" << d.span.line << ":" << d.span.col << ": " << p.error << "error" << p.reset
        << " " << d.code << ": " << d.message << "\n";
}

inline void print_validate_diags(const std::string& file, const std::vector<Diagnostic>& diags,
                                 std::ostream& out) {
  Palette p = palette_for(out);
  for (const Diagnostic& d : diags) {
    bool warn = d.severity == Diagnostic::Severity::Warning;
    out << file << ": " << (warn ? p.warning : p.error) << (warn ? "warning" : "error") << p.reset
        << " " << d.code << ": " << d.subject << ": " << d.message << "\n";
  }
}

// Parses and validates a model file.  On failure prints what went wrong
// and sets fail_code: 2 for an unreadable file, 1 for error diagnostics.
// Warnings print but do not block.
inline std::optional<Model> load_model(const std::string& path, std::ostream& diag_out,
                                       std::ostream& err, int& fail_code) {
  std::string text;
  if (!read_file(path, text)) {
    err << "flowkit: cannot read '" << path << "'\n";
    fail_code = 2;
    return std::nullopt;
  }
  ParseResult pr = parse(text);
  if (!pr.ok()) {
    print_parse_diags(path, pr.diagnostics, diag_out);
    fail_code = 1;
    return std::nullopt;
  }
  std::vector<Diagnostic> diags = validate(*pr.model);
  print_validate_diags(path, diags, diag_out);
  if (any_errors(diags)) {
    fail_code = 1;
    return std::nullopt;
  }
  return std::move(pr.model);
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using cli_detail::read_file;
  using cli_detail::write_file;

  CLI::App app{"Toolkit for token-flow conceptual models"};
  app.name("flowkit");

  auto* validate_cmd = app.add_subcommand("validate", "Check a model and report diagnostics");
  std::string v_file;
  bool v_json = false;
  validate_cmd->add_option("file", v_file, "model file")->required();
  validate_cmd->add_flag("--json", v_json, "emit diagnostics as a JSON array");

  auto* sim_cmd = app.add_subcommand("sim", "Run a scenario and emit the trace");
  std::string s_file, s_scenario, s_trace, s_events;
  std::int64_t s_max_ticks = -1;
  sim_cmd->add_option("file", s_file, "model file")->required();
  sim_cmd->add_option("--scenario", s_scenario, "scenario JSON file")->required();
  sim_cmd->add_option("--max-ticks", s_max_ticks, "override the scenario's tick budget")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--trace", s_trace, "write the trace here instead of stdout");
  sim_cmd->add_option("--events", s_events, "also write extracted events as JSON");

  auto* render_cmd = app.add_subcommand("render", "Render a model to Graphviz DOT");
  std::string r_file, r_out, r_trace, r_rankdir = "LR";
  std::int64_t r_tick = -1;
  bool r_no_spheres = false;
  render_cmd->add_option("file", r_file, "model file")->required();
  render_cmd->add_option("-o,--output", r_out, "output DOT file")->required();
  render_cmd->add_option("--snapshot-tick", r_tick, "mark endpoints active at this trace tick")
      ->check(CLI::NonNegativeNumber);
  render_cmd->add_option("--trace", r_trace, "trace file for --snapshot-tick");
  render_cmd->add_flag("--no-spheres", r_no_spheres, "omit sphere clusters");
  render_cmd->add_option("--rankdir", r_rankdir, "layout direction")
      ->check(CLI::IsMember({"LR", "TB"}));

  auto* fmt_cmd = app.add_subcommand("fmt", "Rewrite a model in canonical form");
  std::string f_file;
  bool f_write = false;
  fmt_cmd->add_option("file", f_file, "model file")->required();
  fmt_cmd->add_flag("--write", f_write, "rewrite the file in place (drops comments)");

  auto* examples_cmd = app.add_subcommand("examples", "Built-in example models");
  bool e_list = false;
  std::string e_emit, e_regen;
  examples_cmd->add_flag("--list", e_list, "list example names");
  examples_cmd->add_option("--emit", e_emit, "print one example's source");
  examples_cmd->add_option("--regen-golden", e_regen,
                           "write reference traces and events into a directory");

  std::vector<const char*> argv;
  argv.push_back("flowkit");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "flowkit: " << e.what() << "\n";
    return 2;
  }

  if (validate_cmd->parsed()) {
    std::string text;
    if (!read_file(v_file, text)) {
      err << "flowkit: cannot read '" << v_file << "'\n";
      return 2;
    }
    ParseResult pr = parse(text);
    std::vector<Diagnostic> diags;
    if (pr.ok()) diags = validate(*pr.model);
    std::size_t errors = pr.diagnostics.size();
    std::size_t warnings = 0;
    for (const Diagnostic& d : diags)
      (d.severity == Diagnostic::Severity::Error ? errors : warnings) += 1;
    if (v_json) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const ParseDiagnostic& d : pr.diagnostics) {
        nlohmann::ordered_json j;
        j["severity"] = "error";
        j["code"] = d.code;
        j["line"] = d.span.line;
        j["col"] = d.span.col;
        j["length"] = d.span.length;
        j["message"] = d.message;
        arr.push_back(std::move(j));
      }
      for (const Diagnostic& d : diags) {
        nlohmann::ordered_json j;
        j["severity"] = d.severity == Diagnostic::Severity::Warning ? "warning" : "error";
        j["code"] = d.code;
        j["subject"] = d.subject;
        j["message"] = d.message;
        arr.push_back(std::move(j));
      }
      out << arr.dump(2) << "\n";
    } else {
      cli_detail::print_parse_diags(v_file, pr.diagnostics, out);
      cli_detail::print_validate_diags(v_file, diags, out);
      out << errors << " errors, " << warnings << " warnings\n";
    }
    return errors ? 1 : 0;
  }

  if (sim_cmd->parsed()) {
    int fail_code = 2;
    auto model = cli_detail::load_model(s_file, err, err, fail_code);
    if (!model) return fail_code;
    std::string sctext;
    if (!read_file(s_scenario, sctext)) {
      err << "flowkit: cannot read '" << s_scenario << "'\n";
      return 2;
    }
    SimTrace trace;
    Scenario sc;
    try {
      sc = scenario_from_json(nlohmann::json::parse(sctext));
      if (s_max_ticks > 0) sc.max_ticks = std::uint32_t(s_max_ticks);
      trace = run_scenario(*model, sc);
    } catch (const nlohmann::json::exception& e) {
      err << "flowkit: scenario '" << s_scenario << "': " << e.what() << "\n";
      return 2;
    } catch (const SimError& e) {
      err << "flowkit: scenario '" << s_scenario << "': " << e.what() << "\n";
      return 2;
    }
    std::string jsonl = trace_to_jsonl(trace);
    if (s_trace.empty()) {
      out << jsonl;
    } else if (!write_file(s_trace, jsonl)) {
      err << "flowkit: cannot write '" << s_trace << "'\n";
      return 2;
    }
    if (!s_events.empty()) {
      Process p = extract_events(*model, trace);
      if (!write_file(s_events, events_to_json(p).dump(2) + "\n")) {
        err << "flowkit: cannot write '" << s_events << "'\n";
        return 2;
      }
    }
    return 0;
  }

  if (render_cmd->parsed()) {
    bool have_tick = r_tick >= 0;
    bool have_trace = !r_trace.empty();
    if (have_tick != have_trace) {
      err << "flowkit: --snapshot-tick and --trace must be used together\n";
      return 2;
    }
    int fail_code = 2;
    auto model = cli_detail::load_model(r_file, err, err, fail_code);
    if (!model) return fail_code;
    RenderOptions opts;
    opts.show_spheres = !r_no_spheres;
    opts.rankdir = r_rankdir == "TB" ? RenderOptions::RankDir::TB : RenderOptions::RankDir::LR;
    std::string dot;
    if (have_tick) {
      std::string trtext;
      if (!read_file(r_trace, trtext)) {
        err << "flowkit: cannot read '" << r_trace << "'\n";
        return 2;
      }
      try {
        SimTrace trace = trace_from_jsonl(trtext);
        dot = to_dot_snapshot(*model, trace, std::uint32_t(r_tick), opts);
      } catch (const SimError& e) {
        err << "flowkit: " << e.what() << "\n";
        return 2;
      } catch (const RenderError& e) {
        err << "flowkit: " << e.what() << "\n";
        return 2;
      }
    } else {
      dot = to_dot(*model, opts);
    }
    if (!write_file(r_out, dot)) {
      err << "flowkit: cannot write '" << r_out << "'\n";
      return 2;
    }
    return 0;
  }

  if (fmt_cmd->parsed()) {
    std::string text;
    if (!read_file(f_file, text)) {
      err << "flowkit: cannot read '" << f_file << "'\n";
      return 2;
    }
    ParseResult pr = parse(text);
    if (!pr.ok()) {
      cli_detail::print_parse_diags(f_file, pr.diagnostics, err);
      return 1;
    }
    std::string canonical = serialize(*pr.model);
    if (f_write) {
      if (!write_file(f_file, canonical)) {
        err << "flowkit: cannot write '" << f_file << "'\n";
        return 2;
      }
    } else {
      out << canonical;
    }
    return 0;
  }

  if (examples_cmd->parsed()) {
    int modes = int(e_list) + int(!e_emit.empty()) + int(!e_regen.empty());
    if (modes > 1) {
      err << "flowkit: pick one of --list, --emit, --regen-golden\n";
      return 2;
    }
    if (!e_emit.empty()) {
      const CorpusModel* m = corpus_find(e_emit);
      if (!m) {
        err << "flowkit: no example named '" << e_emit << "'\n";
        return 2;
      }
      out << m->text;
      return 0;
    }
    if (!e_regen.empty()) {
      for (const CorpusScenario& sc : corpus_scenarios()) {
        const CorpusModel* cm = corpus_find(sc.model);
        ParseResult pr = parse(cm->text);
        if (!pr.ok()) {
          err << "flowkit: built-in model '" << sc.model << "' failed to parse\n";
          return 2;
        }
        SimTrace trace;
        Process proc;
        try {
          Scenario s = scenario_from_json(nlohmann::json::parse(std::string(sc.text)));
          trace = run_scenario(*pr.model, s);
          proc = extract_events(*pr.model, trace);
        } catch (const std::exception& e) {
          err << "flowkit: built-in scenario '" << sc.name << "': " << e.what() << "\n";
          return 2;
        }
        std::string base = e_regen + "/" + std::string(sc.name);
        if (!write_file(base + ".trace.jsonl", trace_to_jsonl(trace)) ||
            !write_file(base + ".events.json", events_to_json(proc).dump(2) + "\n")) {
          err << "flowkit: cannot write under '" << e_regen << "'\n";
          return 2;
        }
        out << "wrote " << base << ".trace.jsonl\n";
        out << "wrote " << base << ".events.json\n";
      }
      return 0;
    }
    for (const CorpusModel& m : corpus_models()) out << m.name << "  " << m.file << "\n";
    return 0;
  }

  err << app.help();
  return 2;
}

}  // namespace flowkit
