#include "kindforge/driver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "kindforge/exprgen.hpp"
#include "kindforge/kindgen.hpp"
#include "kindforge/lattice.hpp"
#include "kindforge/typeops.hpp"

namespace kindforge {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Exact: return "exact";
    case Verdict::MoreGeneral: return "more-general";
    case Verdict::InferredFresh: return "inferred-fresh";
    case Verdict::LessGeneral: return "less-general";
  }
  return "?";
}

Program strip_annotations(const Program& p) {
  Program out = p;
  out.supply = FreshSupply();
  for (AnnotationSite& s : out.sites) s.slot = out.supply.fresh_kind();
  return with_site_kinds(std::move(out));
}

namespace {

template <typename F>
void for_each_child(const TypeRef& t, F&& f) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, types::Msg>) {
          f(n.payload);
        } else if constexpr (std::is_same_v<N, types::Choice>) {
          for (const auto& [l, b] : n.branches) f(b);
        } else if constexpr (std::is_same_v<N, types::Semi>) {
          f(n.head);
          f(n.tail);
        } else if constexpr (std::is_same_v<N, types::Arrow>) {
          f(n.dom);
          f(n.cod);
        } else if constexpr (std::is_same_v<N, types::Record> || std::is_same_v<N, types::Variant>) {
          for (const auto& [l, b] : n.fields) f(b);
        } else if constexpr (std::is_same_v<N, types::Forall> || std::is_same_v<N, types::Rec>) {
          f(n.body);
        }
      },
      t->node);
}

void collect_aliases(const TypeRef& t, std::set<std::string>& out) {
  if (!t->alias.empty()) out.insert(t->alias);
  for_each_child(t, [&](const TypeRef& c) { collect_aliases(c, out); });
}

// Over-approximates the term variables an expression mentions.
void collect_vars(const ExprRef& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        auto go = [&](const ExprRef& c) { collect_vars(c, out); };
        if constexpr (std::is_same_v<N, exprs::Var>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<N, exprs::Abs> || std::is_same_v<N, exprs::TAbs>) {
          go(n.body);
        } else if constexpr (std::is_same_v<N, exprs::App>) {
          go(n.fun);
          go(n.arg);
        } else if constexpr (std::is_same_v<N, exprs::TApp>) {
          go(n.fun);
        } else if constexpr (std::is_same_v<N, exprs::RecordLit>) {
          for (const auto& [l, v] : n.fields) go(v);
        } else if constexpr (std::is_same_v<N, exprs::LetRecord> || std::is_same_v<N, exprs::LetUnit>) {
          go(n.scrutinee);
          go(n.body);
        } else if constexpr (std::is_same_v<N, exprs::Inject>) {
          go(n.payload);
        } else if constexpr (std::is_same_v<N, exprs::Case> || std::is_same_v<N, exprs::Match>) {
          go(n.scrutinee);
          for (const auto& [l, b] : n.branches) go(b.body);
        } else if constexpr (std::is_same_v<N, exprs::Select>) {
          go(n.scrutinee);
        }
      },
      e->node);
}

// Strongly connected components of a dependency graph, dependencies first.
std::vector<std::vector<std::size_t>> components(const std::vector<std::vector<std::size_t>>& deps) {
  std::size_t n = deps.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : deps[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> scc;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
      } while (w != v);
      std::sort(scc.begin(), scc.end());
      out.push_back(std::move(scc));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return out;
}

class Inference {
 public:
  Inference(const Program& p, const InferOptions& options, bool tolerate)
      : program_(options.strip ? strip_annotations(p) : p), options_(options), tolerate_(tolerate) {
    supply_ = program_.supply;
  }

  void run() {
    for (std::size_t i : abbreviation_order()) abbreviation_group(i);
    for (const auto& scc : value_components()) value_group(scc);
  }

  InferResult finish() {
    InferResult r;
    for (AnnotationSite& s : program_.sites) {
      Kind inferred = s.slot;
      if (inferred.is_var()) {
        auto it = solution_.kind_vars.find(inferred.var_id());
        if (it == solution_.kind_vars.end()) it = solution_.kind_vars.emplace(inferred.var_id(), Kind::tl()).first;
        inferred = it->second;
      }
      Verdict v = Verdict::InferredFresh;
      if (s.written) {
        if (*s.written == inferred)
          v = Verdict::Exact;
        else if (lattice::subkind(*s.written, inferred))
          v = Verdict::MoreGeneral;
        else
          v = Verdict::LessGeneral;
      }
      r.annotations.push_back({s.span, s.category, s.owner, s.written, inferred, v});
      s.slot = inferred;
    }
    r.annotated = with_site_kinds(program_);
    r.solution = solution_;
    r.sections = std::move(sections_);
    r.iterations = iterations_;
    r.trace = std::move(trace_);
    return r;
  }

  const std::vector<ConstraintSection>& sections() const { return sections_; }
  const std::vector<std::pair<std::size_t, std::string>>& failures() const { return failures_; }

 private:
  std::vector<std::size_t> abbreviation_order() const {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < program_.decls.size(); ++i)
      if (const auto* a = std::get_if<TypeAbbrev>(&program_.decls[i])) by_name[a->name] = i;
    std::vector<std::size_t> order;
    std::set<std::size_t> seen;
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      if (!seen.insert(i).second) return;
      const auto& a = std::get<TypeAbbrev>(program_.decls[i]);
      std::set<std::string> uses;
      collect_aliases(a.recursive ? std::get<types::Rec>(a.body->node).body : a.body, uses);
      for (const auto& name : uses)
        if (name != a.name && by_name.contains(name)) visit(by_name.at(name));
      order.push_back(i);
    };
    for (std::size_t i = 0; i < program_.decls.size(); ++i)
      if (std::holds_alternative<TypeAbbrev>(program_.decls[i])) visit(i);
    return order;
  }

  std::vector<std::vector<std::size_t>> value_components() const {
    std::vector<std::size_t> values;
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < program_.decls.size(); ++i)
      if (const auto* v = std::get_if<ValueDecl>(&program_.decls[i])) {
        by_name[v->name] = values.size();
        values.push_back(i);
      }
    std::vector<std::vector<std::size_t>> deps(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::set<std::string> vars;
      collect_vars(std::get<ValueDecl>(program_.decls[values[k]]).body, vars);
      for (const auto& name : vars)
        if (auto it = by_name.find(name); it != by_name.end()) deps[k].push_back(it->second);
    }
    auto sccs = components(deps);
    for (auto& scc : sccs)
      for (auto& k : scc) k = values[k];
    return sccs;
  }

  Origin origin(std::string rule, Span span) const { return {std::move(rule), span}; }

  void abbreviation_group(std::size_t i) {
    const auto& a = std::get<TypeAbbrev>(program_.decls[i]);
    ConstraintSet c;
    TypeRef body = apply_solution(a.body, solution_);
    Kind k = gen_type({}, body, supply_, c);
    if (!a.recursive) c.add(Constraint::sub(k, program_.sites[static_cast<std::size_t>(a.site)].slot, origin("Abbrev", a.span)));
    sections_.push_back({a.name, "type", c});
    solve_group(c, sections_.size() - 1);
  }

  void value_group(const std::vector<std::size_t>& members) {
    TypeCtx gamma;
    for (const Decl& d : program_.decls)
      if (const auto* v = std::get_if<ValueDecl>(&d)) gamma[v->name] = apply_solution(v->signature, solution_);

    ConstraintSet all;
    std::size_t first = sections_.size();
    for (std::size_t i : members) {
      const auto& v = std::get<ValueDecl>(program_.decls[i]);
      TypeRef sig = gamma.at(v.name);
      ConstraintSet sig_constraints;
      gen_type({}, sig, supply_, sig_constraints);
      sections_.push_back({v.name, "signature", sig_constraints});

      std::vector<const types::Forall*> quants;
      TypeRef inner_sig = sig;
      while (const auto* f = as<types::Forall>(inner_sig)) {
        quants.push_back(f);
        inner_sig = f->body;
      }
      ExprRef body = apply_solution(v.body, solution_);
      std::vector<std::pair<const exprs::TAbs*, Span>> tabs;
      while (const auto* t = as<exprs::TAbs>(body)) {
        tabs.emplace_back(t, body->span);
        body = t->body;
      }
      if (!tabs.empty() && tabs.size() != quants.size())
        throw Error(ErrorCode::TypeMismatch, v.body->span,
                    fmt::format("{} has {} type abstractions but its signature quantifies {} variables", v.name,
                                tabs.size(), quants.size()));

      KindCtx delta;
      ConstraintSet bind;
      std::vector<std::string> names;
      for (std::size_t q = 0; q < quants.size(); ++q) {
        if (tabs.empty()) {
          delta[quants[q]->var] = quants[q]->kind;
          names.push_back(quants[q]->var);
          continue;
        }
        const auto& [t, span] = tabs[q];
        delta[t->var] = t->kind;
        names.push_back(t->var);
        bind.add(Constraint::sub(t->kind, quants[q]->kind, origin("Bind", span)));
        bind.add(Constraint::sub(quants[q]->kind, t->kind, origin("Bind", span)));
      }
      if (!bind.empty()) sections_.push_back({v.name, "bind", bind});

      ExprResult r = gen_expr(delta, gamma, body, default_builtins(), supply_);
      TypeRef actual = r.type;
      for (auto it = names.rbegin(); it != names.rend(); ++it)
        actual = make_type(types::Forall{*it, Kind::tl(), actual});
      if (!equivalent(actual, sig))
        throw Error(ErrorCode::TypeMismatch, v.body->span,
                    fmt::format("{} has type {} but its signature is {}", v.name, pretty(actual), pretty(sig)));
      sections_.push_back({v.name, "body", r.constraints});
    }
    for (std::size_t s = first; s < sections_.size(); ++s) all.append(sections_[s].constraints);
    solve_group(all, sections_.size() - 1);
  }

  void solve_group(const ConstraintSet& c, std::size_t section) {
    try {
      SolveResult r = solve(c.items(), options_.solver);
      iterations_ += r.iterations;
      trace_.insert(trace_.end(), r.trace.begin(), r.trace.end());
      for (const auto& [id, k] : r.solution.kind_vars) solution_.kind_vars[id] = k;
      for (const auto& [id, m] : r.solution.mult_vars) solution_.mult_vars[id] = m;
    } catch (const SolveError& e) {
      if (!tolerate_) throw;
      failures_.emplace_back(section, e.what());
    }
  }

  Program program_;
  InferOptions options_;
  bool tolerate_;
  FreshSupply supply_;
  Solution solution_;
  std::vector<ConstraintSection> sections_;
  std::vector<std::pair<std::size_t, std::string>> failures_;
  std::size_t iterations_ = 0;
  std::vector<TraceEntry> trace_;
};

std::string kind_text(const std::optional<Kind>& k) { return k ? pretty(*k) : "-"; }

nlohmann::json annotation_json(const AnnotationReport& a) {
  return {{"span", to_string(a.span)},
          {"category", std::string(to_string(a.category))},
          {"owner", a.owner},
          {"written", a.written ? nlohmann::json(pretty(*a.written)) : nlohmann::json(nullptr)},
          {"inferred", pretty(a.inferred)},
          {"verdict", std::string(to_string(a.verdict))}};
}

std::string annotation_text(const AnnotationReport& a) {
  return fmt::format("{:<8} {:<18} {:<14} written {:<3} inferred {:<3} {}", to_string(a.span), to_string(a.category),
                     a.owner, kind_text(a.written), pretty(a.inferred), to_string(a.verdict));
}

}  // namespace

InferResult infer_program(const Program& p, const InferOptions& options) {
  Inference inference(p, options, false);
  inference.run();
  return inference.finish();
}

std::string dump_constraints(const Program& p, bool explain, bool strip) {
  InferOptions options;
  options.strip = strip;
  Inference inference(p, options, true);
  inference.run();
  std::string out;
  const auto& sections = inference.sections();
  for (std::size_t i = 0; i < sections.size(); ++i) {
    out += fmt::format("-- {} : {}\n", sections[i].owner, sections[i].part);
    for (const Constraint& c : sections[i].constraints) {
      out += pretty(c);
      if (explain) out += fmt::format(" -- {}@{}", c.origin().rule, to_string(c.origin().span));
      out += "\n";
    }
    for (const auto& [section, message] : inference.failures())
      if (section == i)
        out += "-- unsatisfiable: " + message + "\n";
  }
  return out;
}

RunSummary run_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".fstk") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  RunSummary summary;
  for (const auto& path : files) {
    FileOutcome outcome;
    outcome.file = path.filename().string();
    try {
      std::ifstream in(path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      InferResult r = infer_program(parse_program(buffer.str()));
      outcome.annotations = r.annotations;
      outcome.ok = true;
      for (const auto& a : r.annotations) {
        ++summary.counts[a.category][a.verdict];
        ++summary.total;
        if (a.verdict == Verdict::LessGeneral) {
          ++summary.violations;
          outcome.ok = false;
          outcome.diagnostic = fmt::format("{}: written {} is not below inferred {}", to_string(a.span),
                                           kind_text(a.written), pretty(a.inferred));
        }
      }
    } catch (const Error& e) {
      outcome.error = e.code();
      outcome.diagnostic = e.what();
      ++summary.failed;
    }
    summary.files.push_back(std::move(outcome));
  }
  return summary;
}

nlohmann::json to_json(const std::string& file, const InferResult& r) {
  nlohmann::json kinds = nlohmann::json::object(), mults = nlohmann::json::object();
  for (const auto& [id, k] : r.solution.kind_vars) kinds[fmt::format("k{}", id)] = pretty(k);
  for (const auto& [id, m] : r.solution.mult_vars) mults[fmt::format("m{}", id)] = pretty(m);
  nlohmann::json annotations = nlohmann::json::array();
  for (const auto& a : r.annotations) annotations.push_back(annotation_json(a));
  return {{"file", file}, {"solution", {{"kindVars", kinds}, {"multVars", mults}}}, {"annotations", annotations}};
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : s.files) {
    nlohmann::json annotations = nlohmann::json::array();
    for (const auto& a : f.annotations) annotations.push_back(annotation_json(a));
    files.push_back({{"file", f.file},
                     {"ok", f.ok},
                     {"error", f.error ? nlohmann::json(std::string(to_string(*f.error))) : nlohmann::json(nullptr)},
                     {"diagnostic", f.diagnostic},
                     {"annotations", annotations}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [category, verdicts] : s.counts)
    for (const auto& [verdict, n] : verdicts) counts[std::string(to_string(category))][std::string(to_string(verdict))] = n;
  return {{"files", files}, {"counts", counts}, {"total", s.total}, {"failed", s.failed}, {"violations", s.violations}};
}

std::string report_text(const std::string& file, const InferResult& r) {
  std::string out = "file: " + file + "\nsolution:\n";
  for (const auto& [id, k] : r.solution.kind_vars) out += fmt::format("  k{} = {}\n", id, pretty(k));
  for (const auto& [id, m] : r.solution.mult_vars) out += fmt::format("  m{} = {}\n", id, pretty(m));
  out += "annotations:\n";
  for (const auto& a : r.annotations) out += "  " + annotation_text(a) + "\n";
  return out;
}

std::string report_text(const RunSummary& s) {
  std::string out;
  for (const auto& f : s.files) {
    if (f.ok)
      out += fmt::format("{}: ok, {} sites\n", f.file, f.annotations.size());
    else
      out += fmt::format("{}: FAILED {}\n", f.file, f.diagnostic);
  }
  constexpr Verdict kVerdicts[] = {Verdict::Exact, Verdict::MoreGeneral, Verdict::InferredFresh, Verdict::LessGeneral};
  constexpr SiteCategory kCategories[] = {SiteCategory::TypeAbbreviation, SiteCategory::Universal,
                                          SiteCategory::Recursive, SiteCategory::TypeAbstraction};
  out += fmt::format("\n{:<18} {:>6} {:>12} {:>14} {:>12} {:>6}\n", "category", "exact", "more-general",
                     "inferred-fresh", "less-general", "total");
  for (SiteCategory c : kCategories) {
    std::size_t row = 0;
    std::string cells;
    for (Verdict v : kVerdicts) {
      std::size_t n = 0;
      if (auto it = s.counts.find(c); it != s.counts.end())
        if (auto jt = it->second.find(v); jt != it->second.end()) n = jt->second;
      row += n;
      cells += fmt::format(" {:>{}}", n, v == Verdict::Exact ? 6 : v == Verdict::InferredFresh ? 14 : 12);
    }
    out += fmt::format("{:<18}{} {:>6}\n", to_string(c), cells, row);
  }
  out += fmt::format("files {}, failed {}, sites {}, violations {}\n", s.files.size(), s.failed, s.total,
                     s.violations);
  return out;
}

}  // namespace kindforge
