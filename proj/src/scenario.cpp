// Copyright 2026 The acqpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acqpt/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "acqpt/rng.hpp"

namespace acqpt {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Stream tag separating the truth-channel draw from the run's own stream.
constexpr std::uint64_t kTruthStream = 0x54525554ULL;

const std::vector<std::string> kChannels = {
    "haar", "kraus", "identity", "ixh", "cnot", "imperfect_cnot"};

bool known_channel(const std::string& name) {
  return std::find(kChannels.begin(), kChannels.end(), name) !=
         kChannels.end();
}

bool filename_safe(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("scenario: bad integer for " + key);
  }
  if (used != value.size())
    throw std::invalid_argument("scenario: bad integer for " + key);
  return out;
}

double parse_double(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("scenario: bad number for " + key);
  }
  if (used != value.size())
    throw std::invalid_argument("scenario: bad number for " + key);
  return out;
}

std::vector<Index> parse_subsystems(const std::string& value) {
  std::vector<Index> dims;
  std::string token;
  for (char c : value + "x") {
    if (c == 'x' || c == ',') {
      if (!token.empty()) {
        dims.push_back(static_cast<Index>(parse_int(token, "subsystems")));
        token.clear();
      }
    } else {
      token += c;
    }
  }
  if (dims.empty())
    throw std::invalid_argument("scenario: empty subsystems value");
  return dims;
}

void apply_template_key(RunTemplate& t, const std::string& key,
                        const std::string& value) {
  if (key == "d") {
    t.config.d = static_cast<Index>(parse_int(value, key));
  } else if (key == "strategy") {
    t.config.strategy = strategy_from_string(value);
  } else if (key == "channel") {
    t.channel = value;
  } else if (key == "rank") {
    t.rank = static_cast<Index>(parse_int(value, key));
  } else if (key == "eta") {
    t.eta = parse_double(value, key);
  } else if (key == "trials") {
    t.trials = static_cast<int>(parse_int(value, key));
  } else if (key == "noise") {
    t.config.noise.kind = noise_kind_from_string(value);
  } else if (key == "copies") {
    t.config.noise.copies = parse_int(value, key);
  } else if (key == "epsilon") {
    t.config.epsilon = parse_double(value, key);
  } else if (key == "max_steps") {
    t.config.max_steps = static_cast<int>(parse_int(value, key));
  } else if (key == "restarts") {
    t.config.restarts = static_cast<int>(parse_int(value, key));
  } else if (key == "tau_rank") {
    t.config.tau_rank = parse_double(value, key);
  } else if (key == "subsystems") {
    t.config.subsystem_dims = parse_subsystems(value);
  } else {
    throw std::invalid_argument("scenario: unknown template key " + key);
  }
}

}  // namespace

Scenario parse_scenario_ini(std::istream& in) {
  Scenario sc;
  RunTemplate* current = nullptr;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::invalid_argument("scenario: unterminated section at line " +
                                    std::to_string(line_no));
      std::string inner = trim(s.substr(1, s.size() - 2));
      const std::string prefix = "template";
      if (inner.compare(0, prefix.size(), prefix) != 0)
        throw std::invalid_argument("scenario: unknown section at line " +
                                    std::to_string(line_no));
      std::string name = trim(inner.substr(prefix.size()));
      sc.templates.emplace_back();
      current = &sc.templates.back();
      current->name = name;
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario: expected key = value at line " +
                                  std::to_string(line_no));
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (current == nullptr) {
      if (key == "name") {
        sc.name = value;
      } else if (key == "out") {
        sc.out_dir = value;
      } else if (key == "seed") {
        sc.master_seed = static_cast<std::uint64_t>(parse_int(value, key));
      } else {
        throw std::invalid_argument("scenario: unknown global key " + key);
      }
    } else {
      apply_template_key(*current, key, value);
    }
  }
  validate_scenario(sc);
  return sc;
}

Scenario parse_scenario_json(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("scenario: bad JSON: ") +
                                e.what());
  }
  Scenario sc;
  sc.name = j.value("name", "");
  sc.out_dir = j.value("out", "");
  if (j.contains("seed")) sc.master_seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("templates") || !j.at("templates").is_array())
    throw std::invalid_argument("scenario: templates array required");
  for (const json& tj : j.at("templates")) {
    RunTemplate t;
    t.name = tj.value("name", "");
    for (const auto& item : tj.items()) {
      if (item.key() == "name") continue;
      std::string value;
      if (item.value().is_string())
        value = item.value().get<std::string>();
      else
        value = item.value().dump();
      apply_template_key(t, item.key(), value);
    }
    sc.templates.push_back(std::move(t));
  }
  validate_scenario(sc);
  return sc;
}

Scenario parse_scenario(std::istream& in) {
  int c;
  while ((c = in.peek()) != EOF &&
         std::isspace(static_cast<unsigned char>(c)))
    in.get();
  if (c == '{') return parse_scenario_json(in);
  return parse_scenario_ini(in);
}

void validate_scenario(const Scenario& scenario) {
  if (scenario.name.empty())
    throw std::invalid_argument("scenario: name required");
  if (scenario.templates.empty())
    throw std::invalid_argument("scenario: at least one template required");
  for (std::size_t i = 0; i < scenario.templates.size(); ++i) {
    const RunTemplate& t = scenario.templates[i];
    if (!filename_safe(t.name))
      throw std::invalid_argument(
          "scenario: template name must be nonempty and filename safe: '" +
          t.name + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (scenario.templates[j].name == t.name)
        throw std::invalid_argument("scenario: duplicate template name " +
                                    t.name);
    if (t.trials < 1 || t.trials > 999)
      throw std::invalid_argument("scenario: trials outside [1, 999] in " +
                                  t.name);
    if (t.config.d < 2)
      throw std::invalid_argument("scenario: d < 2 in " + t.name);
    if (!known_channel(t.channel))
      throw std::invalid_argument("scenario: unknown channel " + t.channel +
                                  " in " + t.name);
    if ((t.channel == "ixh" || t.channel == "cnot" ||
         t.channel == "imperfect_cnot") &&
        t.config.d != 4)
      throw std::invalid_argument("scenario: channel " + t.channel +
                                  " needs d = 4 in " + t.name);
    if (t.channel == "kraus" &&
        (t.rank < 1 || t.rank > t.config.d * t.config.d))
      throw std::invalid_argument("scenario: kraus rank out of range in " +
                                  t.name);
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"fig2-d4", "fig4-scaling", "fig5-minl1", "expt-cnot-emulation"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.out_dir = "out/" + name;
  auto arm = [&sc](const std::string& arm_name, Index d, Strategy strategy,
                   int trials, int restarts) -> RunTemplate& {
    RunTemplate t;
    t.name = arm_name;
    t.config.d = d;
    t.config.strategy = strategy;
    t.trials = trials;
    t.config.restarts = restarts;
    sc.templates.push_back(std::move(t));
    return sc.templates.back();
  };
  if (name == "fig2-d4") {
    arm("adaptive", 4, Strategy::adaptive_minent, 60, 1);
    arm("random", 4, Strategy::random, 60, 1);
  } else if (name == "fig4-scaling") {
    for (Index d = 2; d <= 5; ++d) {
      std::string suffix = "-d" + std::to_string(d);
      arm("adaptive" + suffix, d, Strategy::adaptive_minent, 10, 1);
      arm("random" + suffix, d, Strategy::random, 10, 1);
      arm("rank1" + suffix, d, Strategy::adaptive_rank1, 10, 1);
    }
  } else if (name == "fig5-minl1") {
    arm("minent", 4, Strategy::adaptive_minent, 20, 1);
    arm("minl1", 4, Strategy::adaptive_minl1, 20, 1);
  } else if (name == "expt-cnot-emulation") {
    RunTemplate& ixh = arm("ixh", 4, Strategy::adaptive_minent, 15, 3);
    ixh.channel = "ixh";
    ixh.config.noise.kind = NoiseKind::poisson;
    RunTemplate& imp =
        arm("imperfect-cnot", 4, Strategy::adaptive_minent, 15, 3);
    imp.channel = "imperfect_cnot";
    imp.config.noise.kind = NoiseKind::poisson;
  } else {
    throw std::invalid_argument("unknown builtin scenario: " + name);
  }
  validate_scenario(sc);
  return sc;
}

namespace {

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;  // unbiased; zero for fewer than two samples
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

}  // namespace

TemplateSummary summarize(const std::vector<RunTrace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("summarize: empty trace list");
  TemplateSummary out;
  out.trials = static_cast<int>(traces.size());
  std::vector<const RunTrace*> converged;
  for (const RunTrace& tr : traces) {
    if (tr.status == RunStatus::converged)
      converged.push_back(&tr);
    else
      ++out.unconverged;
  }
  out.converged = static_cast<int>(converged.size());
  out.convergence_rate =
      static_cast<double>(out.converged) / static_cast<double>(out.trials);
  if (converged.empty()) return out;

  std::vector<double> k_ics, fids;
  std::size_t max_len = 0;
  for (const RunTrace* tr : converged) {
    k_ics.push_back(static_cast<double>(tr->k_ic));
    fids.push_back(tr->steps.empty() ? 0.0 : tr->steps.back().fidelity);
    max_len = std::max(max_len, tr->steps.size());
  }
  Moments mk = moments(k_ics);
  out.k_ic_mean = mk.mean;
  out.k_ic_std = mk.std_dev;
  out.single_sample = converged.size() == 1;
  out.fidelity_mean = moments(fids).mean;

  for (std::size_t i = 0; i < max_len; ++i) {
    std::vector<double> ss, ff;
    for (const RunTrace* tr : converged) {
      if (i < tr->steps.size()) {
        ss.push_back(tr->steps[i].s_cvx);
        ff.push_back(tr->steps[i].fidelity);
      }
    }
    CurvePoint p;
    p.k = static_cast<int>(i) + 1;
    p.n = static_cast<int>(ss.size());
    Moments ms = moments(ss), mf = moments(ff);
    p.s_cvx_mean = ms.mean;
    p.s_cvx_std = ms.std_dev;
    p.fidelity_mean = mf.mean;
    p.fidelity_std = mf.std_dev;
    out.curve.push_back(p);
  }
  return out;
}

namespace {

std::string trace_filename(const std::string& template_name, int trial) {
  char num[16];
  std::snprintf(num, sizeof num, "%03d", trial);
  return "trace-" + template_name + "-" + num + ".json";
}

KrausSet make_truth(const RunTemplate& t, Rng& rng) {
  if (t.channel == "haar") {
    KrausSet ks;
    ks.d = t.config.d;
    ks.ops = {haar_unitary(t.config.d, rng)};
    return ks;
  }
  if (t.channel == "kraus")
    return random_kraus_set(t.config.d, t.rank, rng);
  return named_channel(t.channel, t.config.d, t.eta);
}

struct TrialOutcome {
  std::optional<RunTrace> trace;
  std::string error;
  double wall_ms = 0.0;
};

json summary_to_json(const Summary& summary) {
  json j;
  j["schema"] = "acqpt-summary/1";
  j["scenario"] = summary.scenario;
  if (summary.master_seed.has_value())
    j["master_seed"] = std::to_string(*summary.master_seed);
  json arr = json::array();
  for (const TemplateSummary& t : summary.templates) {
    json tj;
    tj["template"] = t.name;
    tj["trials"] = t.trials;
    tj["converged"] = t.converged;
    tj["unconverged"] = t.unconverged;
    tj["failed"] = t.failed;
    tj["convergence_rate"] = format_real(t.convergence_rate);
    tj["k_ic_mean"] = format_real(t.k_ic_mean);
    tj["k_ic_std"] = format_real(t.k_ic_std);
    tj["single_sample"] = t.single_sample;
    tj["fidelity_mean"] = format_real(t.fidelity_mean);
    json curve = json::array();
    for (const CurvePoint& p : t.curve) {
      json pj;
      pj["k"] = p.k;
      pj["n"] = p.n;
      pj["s_cvx_mean"] = format_real(p.s_cvx_mean);
      pj["s_cvx_std"] = format_real(p.s_cvx_std);
      pj["fidelity_mean"] = format_real(p.fidelity_mean);
      pj["fidelity_std"] = format_real(p.fidelity_std);
      curve.push_back(std::move(pj));
    }
    tj["curve"] = std::move(curve);
    arr.push_back(std::move(tj));
  }
  j["templates"] = std::move(arr);
  return j;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_summary_json(const Summary& summary, std::ostream& out) {
  out << summary_to_json(summary).dump(2) << '\n';
}

ScenarioResult run_scenario(const Scenario& scenario) {
  validate_scenario(scenario);
  if (!scenario.master_seed.has_value())
    throw std::invalid_argument("scenario: master seed required");
  if (scenario.out_dir.empty())
    throw std::invalid_argument("scenario: output directory required");
  const std::uint64_t master = *scenario.master_seed;

  struct Job {
    std::size_t template_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t ti = 0; ti < scenario.templates.size(); ++ti)
    for (int trial = 0; trial < scenario.templates[ti].trials; ++trial)
      jobs.push_back({ti, trial});

  int workers = 1;
  if (const char* env = std::getenv("ACQPT_WORKERS"))
    workers = std::max(1, std::atoi(env));
  workers = std::min<int>(workers, static_cast<int>(jobs.size()));

  std::vector<TrialOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const RunTemplate& t = scenario.templates[job.template_index];
      TrialOutcome& slot = outcomes[i];
      auto t0 = std::chrono::steady_clock::now();
      try {
        RunConfig cfg = t.config;
        cfg.seed = derive_seed(derive_seed(master, job.template_index),
                               static_cast<std::uint64_t>(job.trial));
        Rng truth_rng(derive_seed(cfg.seed, kTruthStream));
        cfg.truth = make_truth(t, truth_rng);
        slot.trace = run(cfg);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
      slot.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    }
  };
  auto wall_start = std::chrono::steady_clock::now();
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  double wall_total_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - wall_start)
                             .count();

  fs::create_directories(scenario.out_dir);
  const fs::path dir(scenario.out_dir);

  ScenarioResult result;
  result.summary.scenario = scenario.name;
  result.summary.master_seed = master;

  std::ostringstream curves;
  curves << "template,trial,k,kappa,s_cvx,fidelity,entropy\n";
  json manifest;
  manifest["schema"] = "acqpt-manifest/1";
  manifest["scenario"] = scenario.name;
  json entries = json::array();
  json meta_templates = json::array();

  std::size_t cursor = 0;
  for (std::size_t ti = 0; ti < scenario.templates.size(); ++ti) {
    const RunTemplate& t = scenario.templates[ti];
    std::vector<RunTrace> traces;
    int failed = 0;
    double wall_sum = 0.0;
    for (int trial = 0; trial < t.trials; ++trial, ++cursor) {
      TrialOutcome& outcome = outcomes[cursor];
      wall_sum += outcome.wall_ms;
      json entry;
      entry["template"] = t.name;
      entry["trial"] = trial;
      if (outcome.trace.has_value()) {
        std::string fname = trace_filename(t.name, trial);
        std::ostringstream body;
        write_trace_json(*outcome.trace, body, /*include_wall=*/false);
        write_file(dir / fname, body.str());
        for (const StepRecord& s : outcome.trace->steps) {
          curves << t.name << ',' << trial << ',' << s.k << ',' << s.kappa
                 << ',' << format_real(s.s_cvx) << ','
                 << format_real(s.fidelity) << ',' << format_real(s.entropy)
                 << '\n';
        }
        traces.push_back(std::move(*outcome.trace));
        entry["status"] = "done";
        entry["file"] = fname;
      } else {
        ++failed;
        entry["status"] = "failed";
        entry["error"] = outcome.error;
      }
      entries.push_back(std::move(entry));
    }
    TemplateSummary ts;
    if (!traces.empty()) ts = summarize(traces);
    ts.name = t.name;
    ts.trials = t.trials;
    ts.failed = failed;
    ts.wall_ms_mean =
        t.trials > 0 ? wall_sum / static_cast<double>(t.trials) : 0.0;
    result.failed += failed;
    json mt;
    mt["template"] = t.name;
    mt["wall_ms_mean"] = ts.wall_ms_mean;
    meta_templates.push_back(std::move(mt));
    result.summary.templates.push_back(std::move(ts));
  }
  manifest["trials"] = std::move(entries);

  write_file(dir / "curves.csv", curves.str());
  {
    std::ostringstream body;
    write_summary_json(result.summary, body);
    write_file(dir / "summary.json", body.str());
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  json meta;
  meta["schema"] = "acqpt-metadata/1";
  meta["scenario"] = scenario.name;
  meta["workers"] = workers;
  meta["generated_unix"] = static_cast<std::int64_t>(std::time(nullptr));
  meta["wall_ms_total"] = wall_total_ms;
  meta["templates"] = std::move(meta_templates);
  write_file(dir / "metadata.json", meta.dump(2) + "\n");

  return result;
}

Summary summarize_directory(const std::string& dir) {
  std::vector<std::string> names;  // first-seen order
  std::vector<std::pair<std::string, fs::path>> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("trace-", 0) != 0) continue;
    if (entry.path().extension() != ".json") continue;
    std::string stem = entry.path().stem().string().substr(6);
    std::size_t dash = stem.rfind('-');
    if (dash == std::string::npos) continue;
    files.emplace_back(stem.substr(0, dash), entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  Summary summary;
  summary.scenario = fs::path(dir).filename().string();
  for (const auto& [name, path] : files)
    if (std::find(names.begin(), names.end(), name) == names.end())
      names.push_back(name);
  for (const std::string& name : names) {
    std::vector<RunTrace> traces;
    for (const auto& [fname, path] : files) {
      if (fname != name) continue;
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open " + path.string());
      traces.push_back(read_trace_json(in));
    }
    TemplateSummary ts = summarize(traces);
    ts.name = name;
    summary.templates.push_back(std::move(ts));
  }
  return summary;
}

}  // namespace acqpt
