#!/usr/bin/env python3
"""Regenerate include/flowkit/corpus.hpp from the files under corpus/.

The header embeds every model and scenario byte for byte; tests compare the
embedded text against the shipped files, so rerun this after editing either.
"""

import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
OUT = ROOT / "include" / "flowkit" / "corpus.hpp"

MODELS = [
    ("book-flow", "book.fm"),
    ("speaker-listener", "speaker.fm"),
    ("job-offer-events", "joboffer.fm"),
    ("phosphorus-cycle", "phosphorus.fm"),
    ("call-center", "callcenter.fm"),
]

SCENARIOS = [
    ("book", "book.json", "book-flow"),
    ("speaker", "speaker.json", "speaker-listener"),
    ("joboffer", "joboffer.json", "job-offer-events"),
    ("phosphorus", "phosphorus.json", "phosphorus-cycle"),
    ("callcenter-accept", "callcenter-accept.json", "call-center"),
    ("callcenter-decline", "callcenter-decline.json", "call-center"),
    ("callcenter-expired", "callcenter-expired.json", "call-center"),
    ("callcenter-negative", "callcenter-negative.json", "call-center"),
]


def raw_literal(text: str) -> str:
    assert ")fmsrc" not in text, "raw literal delimiter collision"
    return 'R"fmsrc(' + text + ')fmsrc"'


def cpp_ident(name: str) -> str:
    return name.replace("-", "_")


def main() -> None:
    parts = []
    parts.append("#pragma once\n")
    parts.append("\n")
    parts.append("// Built-in example models and scenarios.  Generated by\n")
    parts.append("// tools/embed_corpus.py from the files under corpus/; the embedded\n")
    parts.append("// text is byte-identical to those files.  Do not edit by hand.\n")
    parts.append("\n")
    parts.append("#include <optional>\n")
    parts.append("#include <string_view>\n")
    parts.append("#include <vector>\n")
    parts.append("\n")
    parts.append("namespace flowkit {\n")
    parts.append("\n")
    parts.append("struct CorpusModel {\n")
    parts.append("  std::string_view name;  // stable entry name\n")
    parts.append("  std::string_view file;  // file name under corpus/\n")
    parts.append("  std::string_view text;\n")
    parts.append("};\n")
    parts.append("\n")
    parts.append("struct CorpusScenario {\n")
    parts.append("  std::string_view name;   // file stem\n")
    parts.append("  std::string_view file;   // file name under corpus/scenarios/\n")
    parts.append("  std::string_view model;  // entry name of the model it drives\n")
    parts.append("  std::string_view text;\n")
    parts.append("};\n")
    parts.append("\n")
    parts.append("namespace corpus_text {\n")
    parts.append("\n")
    for name, fname in MODELS:
        text = (CORPUS / fname).read_text()
        parts.append(
            f"inline constexpr std::string_view {cpp_ident(name)} =\n"
            f"    {raw_literal(text)};\n\n"
        )
    for name, fname, _model in SCENARIOS:
        text = (CORPUS / "scenarios" / fname).read_text()
        parts.append(
            f"inline constexpr std::string_view scenario_{cpp_ident(name)} =\n"
            f"    {raw_literal(text)};\n\n"
        )
    parts.append("}  // namespace corpus_text\n")
    parts.append("\n")
    parts.append("inline const std::vector<CorpusModel>& corpus_models() {\n")
    parts.append("  static const std::vector<CorpusModel> models = {\n")
    for name, fname in MODELS:
        parts.append(f'      {{"{name}", "{fname}", corpus_text::{cpp_ident(name)}}},\n')
    parts.append("  };\n")
    parts.append("  return models;\n")
    parts.append("}\n")
    parts.append("\n")
    parts.append("inline const std::vector<CorpusScenario>& corpus_scenarios() {\n")
    parts.append("  static const std::vector<CorpusScenario> scenarios = {\n")
    for name, fname, model in SCENARIOS:
        parts.append(
            f'      {{"{name}", "{fname}", "{model}", corpus_text::scenario_{cpp_ident(name)}}},\n'
        )
    parts.append("  };\n")
    parts.append("  return scenarios;\n")
    parts.append("}\n")
    parts.append("\n")
    parts.append("// Looks a model up by entry name or file stem (\"book-flow\" or \"book\").\n")
    parts.append("inline const CorpusModel* corpus_find(std::string_view key) {\n")
    parts.append("  for (const CorpusModel& m : corpus_models()) {\n")
    parts.append("    std::string_view stem = m.file.substr(0, m.file.rfind('.'));\n")
    parts.append("    if (m.name == key || stem == key) return &m;\n")
    parts.append("  }\n")
    parts.append("  return nullptr;\n")
    parts.append("}\n")
    parts.append("\n")
    parts.append("}  // namespace flowkit\n")
    OUT.write_text("".join(parts))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
