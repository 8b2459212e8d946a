#ifndef KINDFORGE_DRIVER_HPP
#define KINDFORGE_DRIVER_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kindforge/parser.hpp"
#include "kindforge/solution.hpp"
#include "kindforge/solver.hpp"

namespace kindforge {

// LessGeneral never arises from a principal solution; it flags a violation.
enum class Verdict : std::uint8_t { Exact, MoreGeneral, InferredFresh, LessGeneral };

std::string_view to_string(Verdict v);

struct AnnotationReport {
  Span span;
  SiteCategory category;
  std::string owner;
  std::optional<Kind> written;
  Kind inferred;
  Verdict verdict;
};

// Replaces every kind annotation by a fresh kind variable. The written kinds
// stay recorded in the program's sites.
Program strip_annotations(const Program& p);

struct InferOptions {
  bool strip = true;
  SolverConfig solver;
};

// Constraints generated for one part of a declaration, in emission order.
struct ConstraintSection {
  std::string owner;
  std::string part;
  ConstraintSet constraints;
};

struct InferResult {
  Program annotated;
  Solution solution;
  std::vector<AnnotationReport> annotations;
  std::vector<ConstraintSection> sections;
  std::size_t iterations = 0;
  // Solver updates, when tracing is enabled.
  std::vector<TraceEntry> trace;
};

// Generates and solves constraints for each declaration group: abbreviations
// one at a time, then value declarations by strongly connected component,
// dependencies first. Throws on the first unsatisfiable group.
InferResult infer_program(const Program& p, const InferOptions& options = {});

// Constraint sections of every group, without solving beyond what later
// groups need. A group that fails to solve is reported in-line.
std::string dump_constraints(const Program& p, bool explain, bool strip = true);

struct FileOutcome {
  std::string file;
  bool ok = false;
  // Set when parsing or inference failed.
  std::optional<ErrorCode> error;
  std::string diagnostic;
  std::vector<AnnotationReport> annotations;
};

struct RunSummary {
  std::vector<FileOutcome> files;
  std::map<SiteCategory, std::map<Verdict, std::size_t>> counts;
  std::size_t total = 0;
  std::size_t failed = 0;
  // Sites where the written kind is not below the inferred one.
  std::size_t violations = 0;

  bool ok() const { return failed == 0 && violations == 0; }
};

// Strips, infers and checks the generality direction on every `.fstk` file
// in `dir`, in file-name order.
RunSummary run_corpus(const std::filesystem::path& dir);

nlohmann::json to_json(const std::string& file, const InferResult& r);
nlohmann::json to_json(const RunSummary& s);

std::string report_text(const std::string& file, const InferResult& r);
std::string report_text(const RunSummary& s);

}  // namespace kindforge

#endif  // KINDFORGE_DRIVER_HPP
