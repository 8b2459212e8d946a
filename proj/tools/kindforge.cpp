// kindforge: kind and multiplicity inference for annotated-optional programs.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "kindforge/driver.hpp"

namespace {

using namespace kindforge;

int exit_code(const Error& e) {
  switch (phase_of(e.code())) {
    case Phase::Parse: return 2;
    case Phase::Inference: return 1;
    case Phase::Internal: return 3;
  }
  return 3;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void diagnose(const std::string& file, const Error& e) {
  std::cerr << file << ":" << e.what() << "\n";
  const auto* s = dynamic_cast<const SolveError*>(&e);
  if (s && !s->constraint().is_sub()) return;
  if (s && pretty(s->constraint()) != s->lhs_resolved() + " <: " + s->rhs_resolved())
    std::cerr << fmt::format("  under the current solution: {} <: {}\n", s->lhs_resolved(), s->rhs_resolved());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kind and multiplicity inference"};
  app.require_subcommand(1);

  std::string file, emit_path, dir;
  bool json = false, explain = false, no_optimize = false, keep = false;

  auto* infer = app.add_subcommand("infer", "Infer the kinds of every annotation site of a program");
  infer->add_option("FILE", file)->required()->check(CLI::ExistingFile);
  infer->add_option("--emit-annotated", emit_path, "Write the fully annotated program to PATH");
  infer->add_flag("--json", json, "Machine-readable report");
  infer->add_flag("--explain", explain, "Print each solver update with the constraint that caused it");
  infer->add_flag("--no-optimize", no_optimize, "Keep every unsatisfied constraint until the fixpoint");
  infer->add_flag("--keep-annotations", keep, "Use written kinds instead of replacing them by variables");

  auto* corpus = app.add_subcommand("corpus", "Strip and re-infer every .fstk file of a directory");
  corpus->add_option("DIR", dir)->required()->check(CLI::ExistingDirectory);
  corpus->add_flag("--json", json, "Machine-readable summary");

  auto* dump = app.add_subcommand("dump-constraints", "Print the generated constraints, one per line");
  dump->add_option("FILE", file)->required()->check(CLI::ExistingFile);
  dump->add_flag("--explain", explain, "Annotate each constraint with its rule and position");
  dump->add_flag("--keep-annotations", keep, "Use written kinds instead of replacing them by variables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) {
      InferOptions options;
      options.strip = !keep;
      options.solver.optimize = !no_optimize;
      options.solver.trace = explain;
      InferResult r = infer_program(parse_program(read_file(file)), options);
      if (!emit_path.empty()) {
        std::ofstream out(emit_path);
        out << print_program(r.annotated);
        if (!out) throw std::runtime_error("cannot write " + emit_path);
      }
      if (json) {
        std::cout << to_json(file, r).dump(2) << "\n";
      } else {
        std::cout << report_text(file, r);
        if (explain) {
          std::cout << "trace:\n";
          for (const auto& entry : r.trace) std::cout << "  " << to_string(entry) << "\n";
        }
      }
      return 0;
    }
    if (*corpus) {
      RunSummary s = run_corpus(dir);
      if (json)
        std::cout << to_json(s).dump(2) << "\n";
      else
        std::cout << report_text(s);
      if (s.violations) return 3;
      return s.failed ? 1 : 0;
    }
    std::cout << dump_constraints(parse_program(read_file(file)), explain, !keep);
    return 0;
  } catch (const Error& e) {
    diagnose(file, e);
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
