#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pricelab/pricelab.hpp"

namespace pricelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string out;
  int grid = 0;  // 0: command default
  std::vector<std::string> argv;
};

// Instance selection shared by several commands.
struct InstanceRef {
  std::string name;
  std::string spec;
  std::string family;
  std::string eps;
  int member = -1;
};

struct Resolved {
  Instance instance;
  std::optional<Instance> reference;  // base to diff against, when known
  std::optional<HardFamily> family;
};

// ----------------------------------------------------------------------------
// Parsing helpers

inline double parse_number(const std::string& s, const char* what) {
  try {
    return parse_scalar(json(s));
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + ": cannot parse '" + s + "' as a number");
  }
}

inline std::uint64_t parse_count(const std::string& s, const char* what) {
  const double v = parse_number(s, what);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1.8e19)
    throw ConfigError(std::string(what) + " must be a positive integer, got '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

/// "a..bxf" for the geometric list a, a f, a f^2, ... <= b, or "a,b,c".
inline std::vector<std::uint64_t> parse_horizons(const std::string& s) {
  std::vector<std::uint64_t> out;
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_count(item, "horizon"));
  } else {
    const auto x = s.find('x', dots + 2);
    if (x == std::string::npos) throw ConfigError("horizons: expected start..endxfactor, got '" + s + "'");
    const auto start = parse_count(s.substr(0, dots), "horizon start");
    const auto end = parse_count(s.substr(dots + 2, x - dots - 2), "horizon end");
    const auto factor = parse_count(s.substr(x + 1), "horizon factor");
    if (factor < 2) throw ConfigError("horizons: factor must be at least 2");
    if (start > end) throw ConfigError("horizons: start exceeds end");
    for (std::uint64_t v = start; v <= end; v *= factor) {
      out.push_back(v);
      if (v > end / factor) break;
    }
  }
  if (out.empty()) throw ConfigError("horizons: empty list");
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Inline JSON, a JSON file, or a bare type name.
inline json learner_config(const std::string& value) {
  if (!value.empty() && value.front() == '{') {
    try {
      return json::parse(value);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("--learner is not valid JSON: ") + e.what());
    }
  }
  if (std::filesystem::exists(value)) return read_json_file(value);
  return json{{"type", value}};
}

inline Instance named_instance(const std::string& name) {
  if (name == "two-regular-base") return two_regular_base();
  if (name == "three-regular-base") return three_regular_base();
  if (name == "two-regular-3-base") return two_regular3_base();
  if (name == "two-mhr-base") return two_mhr_base();
  if (name == "three-mhr-base") return three_mhr_base();
  if (name == "findbest-demo") return findbest_demo();
  throw ConfigError("unknown instance '" + name +
                    "' (expected two-regular-base, three-regular-base, two-regular-3-base, "
                    "two-mhr-base, three-mhr-base, findbest-demo)");
}

inline Resolved resolve(const InstanceRef& ref, bool certify_family = true) {
  const int sources = !ref.name.empty() + !ref.spec.empty() + !ref.family.empty();
  if (sources != 1) throw ConfigError("name exactly one of --instance, --spec, --family");
  if (!ref.name.empty()) {
    auto inst = named_instance(ref.name);
    return {inst, inst, std::nullopt};
  }
  if (!ref.spec.empty()) return {instance_from_json(read_json_file(ref.spec)), std::nullopt, std::nullopt};
  if (ref.eps.empty()) throw ConfigError("--family needs --eps");
  const auto tag = parse_family_tag(ref.family);
  const double eps = parse_number(ref.eps, "--eps");
  if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
  FamilyOptions opts;
  opts.certify = certify_family;
  auto fam = make_family(tag, eps, opts);
  const int m = ref.member < 0 ? 0 : ref.member;
  if (m > fam.K())
    throw ConfigError("--member must lie in [0, " + std::to_string(fam.K()) + "]");
  Instance inst = m == 0 ? fam.base : fam.members[static_cast<std::size_t>(m - 1)].instance;
  Instance base = fam.base;
  return {std::move(inst), std::move(base), std::move(fam)};
}

// ----------------------------------------------------------------------------
// Output

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json metadata(const Globals& g, const std::string& command) {
  json args = json::array();
  for (const auto& a : g.argv) args.push_back(a);
  return {{"tool", "pricelab"}, {"version", kVersion}, {"command", command},
          {"argv", args},       {"seed", g.seed},      {"timestamp", utc_timestamp()}};
}

// Writes to `path`, or to `fallback` when the path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ----------------------------------------------------------------------------
// Commands

inline json report_json(const ValidationReport& r, const std::string& instance) {
  json kv = json::array();
  for (const auto& k : r.knot_violations) kv.push_back({{"location", k.location}, {"left", k.left}, {"right", k.right}});
  return {{"instance", instance},         {"distribution", r.label},
          {"property", to_string(r.property)}, {"passed", r.passed},
          {"min_margin", r.min_margin},   {"argmin", r.argmin},
          {"grid_points", r.grid_points}, {"excluded_knots", r.excluded_knots},
          {"knot_violations", kv}};
}

inline int cmd_validate(const Globals& g, const InstanceRef& ref, const std::string& property,
                        std::ostream& out, std::ostream& err) {
  std::optional<Property> prop;
  if (!property.empty()) {
    if (property == "regular") prop = Property::Regular;
    else if (property == "mhr") prop = Property::MHR;
    else throw ConfigError("--property must be regular or mhr");
  }
  std::vector<Instance> insts;
  json doc;
  if (!ref.family.empty()) {
    const auto r = resolve(ref, false);
    if (!prop) prop = class_of(r.family->tag);
    insts.push_back(r.family->base);
    for (const auto& m : r.family->members) insts.push_back(m.instance);
    doc["family_tag"] = to_string(r.family->tag);
    doc["eps"] = r.family->eps;
    doc["K"] = r.family->K();
  } else {
    insts.push_back(resolve(ref).instance);
  }
  if (!prop) prop = Property::Regular;

  bool all = true;
  json reports = json::array();
  for (const auto& inst : insts) {
    for (const auto& b : inst.buyers()) {
      const auto rep = check_property(b, *prop, certification_grid(b, g.grid > 0 ? g.grid : 10000));
      if (!rep.passed) {
        all = false;
        err << "FAIL " << inst.label() << " / " << rep.summary() << "\n";
      }
      reports.push_back(report_json(rep, inst.label()));
    }
  }
  doc["metadata"] = metadata(g, "validate");
  doc["property"] = to_string(*prop);
  doc["passed"] = all;
  doc["reports"] = reports;
  emit(g.out, dump(doc), out);
  err << "validate: " << reports.size() << " distributions, " << (all ? "all pass" : "FAILED") << "\n";
  return all ? kExitOk : kExitValidation;
}

inline int cmd_inspect(const Globals& g, const InstanceRef& ref, std::ostream& out, std::ostream& err) {
  const int n = g.grid > 0 ? g.grid : 1000;
  if (n < 2) throw ConfigError("--grid must be at least 2");
  const auto r = resolve(ref);
  const auto& inst = r.instance;
  const bool diff = r.reference.has_value() && r.reference->size() == inst.size();
  std::ostringstream os;
  os << "x";
  for (std::size_t i = 1; i <= inst.size(); ++i) os << ",F_" << i;
  os << ",product_F,r";
  if (diff) {
    for (std::size_t i = 1; i <= inst.size(); ++i) os << ",dF_" << i;
    os << ",dF_product,dr";
  }
  os << "\n";
  double best_r = -1.0, best_x = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double x = static_cast<double>(j) / n;
    os << fmt17(x);
    for (const auto& b : inst.buyers()) os << "," << fmt17(b.cdf(x));
    const double rev = revenue_at(inst, x);
    if (rev > best_r + 1e-12) best_r = rev, best_x = x;
    os << "," << fmt17(product_cdf(inst, x)) << "," << fmt17(rev);
    if (diff) {
      // Base minus member for F, member minus base for r.
      for (std::size_t i = 0; i < inst.size(); ++i)
        os << "," << fmt17(r.reference->buyers()[i].cdf(x) - inst.buyers()[i].cdf(x));
      os << "," << fmt17(product_cdf(*r.reference, x) - product_cdf(inst, x));
      os << "," << fmt17(rev - revenue_at(*r.reference, x));
    }
    os << "\n";
  }
  emit(g.out, os.str(), out);
  err << "inspect " << inst.label() << ": " << n + 1 << " rows, grid max r=" << best_r << " at x=" << best_x << "\n";
  return kExitOk;
}

inline int cmd_export(const Globals& g, const InstanceRef& ref, std::ostream& out, std::ostream& err) {
  if (ref.family.empty()) throw ConfigError("export-family needs --family and --eps");
  const auto r = resolve(ref);
  const auto& fam = *r.family;
  json manifest = manifest_json(fam);
  manifest["metadata"] = metadata(g, "export-family");
  if (g.out.empty()) {
    json all = manifest;
    all["base"] = instance_to_json(fam.base);
    all["instances"] = json::array();
    for (const auto& m : fam.members) all["instances"].push_back(instance_to_json(m.instance));
    out << dump(all);
  } else {
    namespace fs = std::filesystem;
    const fs::path dir(g.out);
    fs::create_directories(dir);
    manifest["base"] = "base.json";
    emit((dir / "base.json").string(), dump(instance_to_json(fam.base)), out);
    char name[32];
    for (int i = 0; i < fam.K(); ++i) {
      std::snprintf(name, sizeof name, "member_%04d.json", i + 1);
      manifest["members"][static_cast<std::size_t>(i)]["file"] = name;
      emit((dir / name).string(), dump(instance_to_json(fam.members[static_cast<std::size_t>(i)].instance)), out);
    }
    emit((dir / "manifest.json").string(), dump(manifest), out);
  }
  err << "export-family " << to_string(fam.tag) << " eps=" << fam.eps << ": K=" << fam.K() << "\n";
  return kExitOk;
}

struct LearnerOpts {
  std::string learner = "vanilla";
  std::string K, eta, core, price;
};

inline json merged_learner(const LearnerOpts& o) {
  json cfg = learner_config(o.learner);
  if (!o.K.empty()) cfg["K"] = o.K;
  if (!o.eta.empty()) cfg["eta"] = o.eta;
  if (!o.core.empty()) cfg["core"] = o.core;
  if (!o.price.empty()) cfg["price"] = o.price;
  return cfg;
}

inline int cmd_episode(const Globals& g, const InstanceRef& ref, const LearnerOpts& lo,
                       const std::string& T_text, const std::string& log_path,
                       const std::string& path_kind, std::ostream& out, std::ostream& err) {
  const auto T = parse_count(T_text, "--T");
  const auto factory = make_learner_factory(merged_learner(lo));
  EpisodeOptions opts;
  if (path_kind == "per-buyer") opts.path = SamplingPath::PerBuyer;
  else if (path_kind != "first-order") throw ConfigError("--sampling must be first-order or per-buyer");
  const auto r = resolve(ref);
  auto learner = factory(T);
  const auto log = run_episode(r.instance, *learner, T, g.seed, opts);
  const auto rep = pseudo_regret(log, r.instance);
  json doc = summary_json(log, rep);
  doc["optimal_price"] = rep.optimal_price;
  doc["optimal_revenue"] = rep.optimal_revenue;
  doc["clamped_rounds"] = log.clamped_rounds();
  doc["metadata"] = metadata(g, "run episode");
  if (!log_path.empty()) {
    std::ostringstream csv;
    write_csv(csv, log);
    emit(log_path, csv.str(), out);
  }
  emit(g.out, dump(doc), out);
  err << "episode " << log.learner_label << " on " << log.instance_label << " T=" << T
      << ": pseudo_regret=" << rep.pseudo_regret << "\n";
  return kExitOk;
}

inline int cmd_regret(const Globals& g, const InstanceRef& ref, const LearnerOpts& lo,
                      const std::string& horizons_text, const std::string& seeds_text,
                      std::ostream& out, std::ostream& err) {
  const auto horizons = parse_horizons(horizons_text);
  const auto seeds = parse_count(seeds_text, "--seeds");
  const auto factory = make_learner_factory(merged_learner(lo));
  const auto r = resolve(ref);
  const auto fit = regret_scaling_experiment(r.instance, factory, horizons, static_cast<int>(seeds), g.seed, g.jobs);
  json doc = to_json(fit);
  doc["metadata"] = metadata(g, "run regret");
  emit(g.out, dump(doc), out);
  err << "regret " << fit.learner << " on " << fit.instance << ": slope=" << fit.slope
      << (fit.degenerate ? " (degenerate)" : "") << "\n";
  return kExitOk;
}

inline ArmGrid parse_arms(const std::string& s) {
  if (s.find(',') == std::string::npos) {
    const auto K = parse_count(s, "--arms");
    if (K > 10000000) throw ConfigError("--arms is too large");
    return ArmGrid(static_cast<int>(K));
  }
  std::vector<double> prices;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) prices.push_back(parse_number(item, "--arms"));
  try {
    return ArmGrid(std::move(prices));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("--arms: ") + e.what());
  }
}

inline int cmd_findbest(const Globals& g, const InstanceRef& ref, const std::string& arms_text,
                        const std::string& T_text, const std::string& core_text,
                        const std::string& trials_text, const std::string& tol_text,
                        std::ostream& out, std::ostream& err) {
  const auto arms = parse_arms(arms_text);
  const auto T = parse_count(T_text, "--T");
  const auto core = parse_core(core_text);
  const auto trials = parse_count(trials_text, "--trials");
  const double tol = parse_number(tol_text, "--tolerance");
  if (!(tol >= 0.0)) throw ConfigError("--tolerance must be non-negative");
  const auto r = resolve(ref);

  std::vector<FindBestResult> res(trials);
  parallel_for(trials, g.jobs, [&](std::size_t t) {
    auto learner = make_core(core, arms, T);
    res[t] = find_best(arms, T, *learner, r.instance, derive_seed(g.seed, t));
  });

  std::vector<double> rev(static_cast<std::size_t>(arms.size()));
  double best = 0.0;
  for (int i = 0; i < arms.size(); ++i) {
    rev[static_cast<std::size_t>(i)] = revenue_at(r.instance, arms[i]);
    best = std::max(best, rev[static_cast<std::size_t>(i)]);
  }
  std::vector<double> freq(rev.size(), 0.0);
  double good = 0.0;
  for (const auto& x : res) {
    freq[static_cast<std::size_t>(x.arm)] += 1.0 / static_cast<double>(trials);
    if (rev[static_cast<std::size_t>(x.arm)] >= best - tol) good += 1.0;
  }
  json doc{{"instance", r.instance.label()},
           {"core", to_string(core)},
           {"T", T},
           {"trials", trials},
           {"arms", arms.prices()},
           {"arm", res[0].arm},
           {"price", res[0].price},
           {"counts", res[0].counts},
           {"arm_revenue", rev},
           {"best_grid_revenue", best},
           {"tolerance", tol},
           {"selection_frequency", freq},
           {"near_optimal_rate", good / static_cast<double>(trials)},
           {"metadata", metadata(g, "run findbest")}};
  emit(g.out, dump(doc), out);
  err << "findbest on " << r.instance.label() << ": arm " << res[0].arm << " (price " << res[0].price
      << "), near-optimal in " << good << "/" << trials << " trials\n";
  return kExitOk;
}

inline int cmd_identify(const Globals& g, const InstanceRef& ref, const LearnerOpts& lo,
                        const std::string& budget_text, const std::string& trials_text,
                        std::ostream& out, std::ostream& err) {
  if (ref.family.empty()) throw ConfigError("run identify needs --family and --eps");
  const auto budget = parse_count(budget_text, "--budget");
  const auto trials = parse_count(trials_text, "--trials");
  if (trials > 100000000) throw ConfigError("--trials is too large");
  const auto factory = make_learner_factory(merged_learner(lo));
  const auto r = resolve(ref);
  const auto res = identification_experiment(*r.family, factory, budget, static_cast<int>(trials), g.seed, g.jobs);
  json doc = to_json(res);
  doc["metadata"] = metadata(g, "run identify");
  emit(g.out, dump(doc), out);
  err << "identify " << res.family_tag << " eps=" << res.eps << " K=" << r.family->K()
      << ": mean success " << res.mean_success() << ", " << res.violations << " KL-budget violations\n";
  return kExitOk;
}

// ----------------------------------------------------------------------------
// Entry point

inline void add_instance_options(CLI::App* sub, InstanceRef& ref, bool member) {
  sub->add_option("--instance", ref.name, "named instance");
  sub->add_option("--spec", ref.spec, "instance or distribution JSON file");
  sub->add_option("--family", ref.family, "hard family tag");
  sub->add_option("--eps", ref.eps, "family accuracy parameter");
  if (member) sub->add_option("--member", ref.member, "member index, 0 for the base");
}

inline void add_learner_options(CLI::App* sub, LearnerOpts& lo) {
  sub->add_option("--learner", lo.learner, "type name, inline JSON, or JSON file");
  sub->add_option("--K", lo.K, "arm count override");
  sub->add_option("--eta", lo.eta, "EXP3 learning rate override");
  sub->add_option("--core", lo.core, "vanilla core: ucb or exp3");
  sub->add_option("--price", lo.price, "constant learner price");
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pricelab: repeated uniform pricing laboratory"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  g.argv = args;
  app.add_option("--seed", g.seed, "top-level random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output file (directory for export-family)");
  app.add_option("--grid", g.grid, "grid resolution")->check(CLI::PositiveNumber);

  InstanceRef ref;
  std::string property;
  auto* validate = app.add_subcommand("validate", "certify regularity or MHR of every distribution");
  add_instance_options(validate, ref, false);
  validate->add_option("--property", property, "regular or mhr");

  auto* inspect = app.add_subcommand("inspect", "CDF and revenue curves as CSV");
  add_instance_options(inspect, ref, true);

  auto* exportf = app.add_subcommand("export-family", "write a family as JSON");
  exportf->add_option("--family", ref.family, "hard family tag")->required();
  exportf->add_option("--eps", ref.eps, "family accuracy parameter")->required();

  auto* run = app.add_subcommand("run", "run an episode or experiment");
  run->require_subcommand(1);
  LearnerOpts lo;
  std::string T = "10000", log_path, sampling = "first-order";
  auto* episode = run->add_subcommand("episode", "one episode; summary JSON and optional CSV log");
  add_instance_options(episode, ref, true);
  add_learner_options(episode, lo);
  episode->add_option("--T", T, "horizon");
  episode->add_option("--log", log_path, "episode CSV path");
  episode->add_option("--sampling", sampling, "first-order or per-buyer");

  std::string horizons = "4096..1048576x2", seeds = "20";
  auto* regret = run->add_subcommand("regret", "regret scaling fit");
  add_instance_options(regret, ref, true);
  add_learner_options(regret, lo);
  regret->add_option("--horizons", horizons, "start..endxfactor or a comma list");
  regret->add_option("--seeds", seeds, "episodes per horizon");

  std::string arms = "10", core = "ucb", trials = "1", tolerance = "0.05";
  std::string fb_T = "2000";
  auto* findbest = run->add_subcommand("findbest", "FindBest over a finite arm set");
  add_instance_options(findbest, ref, true);
  findbest->add_option("--arms", arms, "arm count or comma-separated prices");
  findbest->add_option("--T", fb_T, "rounds given to the core");
  findbest->add_option("--core", core, "ucb or exp3");
  findbest->add_option("--trials", trials, "independent repetitions");
  findbest->add_option("--tolerance", tolerance, "revenue slack counted as near-optimal");

  std::string budget = "100000", id_trials = "100";
  LearnerOpts id_lo;
  id_lo.learner = "ucb";
  auto* identify = run->add_subcommand("identify", "identification experiment on a family");
  add_instance_options(identify, ref, false);
  add_learner_options(identify, id_lo);
  identify->add_option("--budget", budget, "queries per session");
  identify->add_option("--trials", id_trials, "sessions per instance");

  std::vector<const char*> argv{"pricelab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate->parsed()) return cmd_validate(g, ref, property, out, err);
    if (inspect->parsed()) return cmd_inspect(g, ref, out, err);
    if (exportf->parsed()) return cmd_export(g, ref, out, err);
    if (episode->parsed()) return cmd_episode(g, ref, lo, T, log_path, sampling, out, err);
    if (regret->parsed()) return cmd_regret(g, ref, lo, horizons, seeds, out, err);
    if (findbest->parsed()) return cmd_findbest(g, ref, arms, fb_T, core, trials, tolerance, out, err);
    if (identify->parsed()) return cmd_identify(g, ref, id_lo, budget, id_trials, out, err);
  } catch (const ValidationFailure& e) {
    err << "validation failure: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace pricelab::cli
