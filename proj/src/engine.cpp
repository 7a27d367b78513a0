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

#include "acqpt/engine.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "acqpt/cvx.hpp"
#include "acqpt/rng.hpp"

namespace acqpt {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kRunStream = 0xACE5EEDULL;

json ket_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i)
    arr.push_back({format_real(v[i].real()), format_real(v[i].imag())});
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back({format_real(m(i, j).real()), format_real(m(i, j).imag())});
    rows.push_back(std::move(row));
  }
  return rows;
}

bool lex_less_vec(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::adaptive_minent: return "adaptive_minent";
    case Strategy::adaptive_minl1: return "adaptive_minl1";
    case Strategy::random: return "random";
    case Strategy::adaptive_rank1: return "adaptive_rank1";
  }
  throw std::logic_error("to_string: bad strategy");
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "adaptive_minent") return Strategy::adaptive_minent;
  if (s == "adaptive_minl1") return Strategy::adaptive_minl1;
  if (s == "random") return Strategy::random;
  if (s == "adaptive_rank1") return Strategy::adaptive_rank1;
  throw std::invalid_argument("unknown strategy: " + s);
}

std::string to_string(RunStatus s) {
  return s == RunStatus::converged ? "converged" : "max_steps";
}

int rank_estimate(const Matrix& chi, double tau) {
  Matrix h = 0.5 * (chi + chi.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  double cutoff = tau * std::max(h.trace().real(), 0.0);
  int count = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > cutoff) ++count;
  return std::max(count, 1);
}

Matrix next_rotation(const Matrix& chi_est) {
  Matrix h = 0.5 * (chi_est + chi_est.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Index n = h.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<Vector> cols(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    cols[static_cast<std::size_t>(i)] = phase_fix(es.eigenvectors().col(i));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    double la = es.eigenvalues()[a], lb = es.eigenvalues()[b];
    if (la != lb) return la > lb;
    return lex_less_vec(cols[static_cast<std::size_t>(a)],
                        cols[static_cast<std::size_t>(b)]);
  });
  Matrix u(n, n);
  for (Index i = 0; i < n; ++i)
    u.col(i) = cols[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  return u;
}

Vector nearest_product_state(const Vector& v, const std::vector<Index>& dims) {
  Index total = 1;
  for (Index d : dims) total *= d;
  if (total != v.size())
    throw std::invalid_argument("product state: dimension mismatch");
  if (dims.size() <= 1) return phase_fix(v / v.norm());

  // Peel the first factor: reshape so row i1 carries the remainder block,
  // then keep the leading singular pair.
  Index d1 = dims[0];
  Index rest = total / d1;
  Matrix m(d1, rest);
  for (Index i1 = 0; i1 < d1; ++i1)
    for (Index i2 = 0; i2 < rest; ++i2) m(i1, i2) = v[i1 * rest + i2];
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector head = svd.matrixU().col(0);
  Vector tail = svd.matrixV().col(0).conjugate();
  std::vector<Index> rest_dims(dims.begin() + 1, dims.end());
  Vector tail_prod = nearest_product_state(tail, rest_dims);
  Vector out = Eigen::kroneckerProduct(head, tail_prod);
  return phase_fix(out / out.norm());
}

int bkd_count(int d, bool projective) {
  if (d < 2) throw std::invalid_argument("bkd_count: d < 2");
  return projective ? 2 * d * d - d : d * d + d;
}

KrausSet named_channel(const std::string& name, Index d, double eta) {
  KrausSet ks;
  ks.d = d;
  if (name == "identity") {
    ks.ops = {Matrix::Identity(d, d)};
    return ks;
  }
  if (d != 4)
    throw std::invalid_argument("named channel '" + name + "' needs d = 4");
  Matrix h(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = 1.0;
  cnot(1, 1) = 1.0;
  cnot(2, 3) = 1.0;
  cnot(3, 2) = 1.0;
  if (name == "ixh") {
    ks.ops = {Eigen::kroneckerProduct(Matrix::Identity(2, 2), h)};
    return ks;
  }
  if (name == "cnot") {
    ks.ops = {cnot};
    return ks;
  }
  if (name == "imperfect_cnot") {
    if (eta <= 0.0 || eta >= 1.0)
      throw std::invalid_argument("imperfect_cnot: eta outside (0,1)");
    // CNOT followed by depolarizing weight eta on the target qubit; the
    // process matrix has rank exactly 4 for any eta in (0,1).
    Matrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    const Matrix i2 = Matrix::Identity(2, 2);
    const double w = std::sqrt(eta / 4.0);
    ks.ops.push_back(std::sqrt(1.0 - 0.75 * eta) * cnot);
    ks.ops.push_back(w * Eigen::kroneckerProduct(i2, x) * cnot);
    ks.ops.push_back(w * Eigen::kroneckerProduct(i2, y) * cnot);
    ks.ops.push_back(w * Eigen::kroneckerProduct(i2, z) * cnot);
    return ks;
  }
  throw std::invalid_argument("unknown channel name: " + name);
}

namespace {

RunTrace run_impl(const RunConfig& config, bool pin_kappa) {
  const Index d = config.d;
  const Index n = d * d;
  if (d < 2) throw std::invalid_argument("run: d < 2");
  if (config.truth.d != d) throw std::invalid_argument("run: truth dimension");
  if (config.epsilon <= 0.0) throw std::invalid_argument("run: epsilon <= 0");
  if (config.restarts < 1) throw std::invalid_argument("run: restarts < 1");
  const int max_steps =
      config.max_steps > 0
          ? config.max_steps
          : 6 * static_cast<int>(d) * static_cast<int>(d) *
                static_cast<int>(d) * static_cast<int>(d);

  Rng rng(derive_seed(config.seed, kRunStream));
  Matrix chi_true = kraus_to_chi(config.truth);

  RunTrace trace;
  trace.d = d;
  trace.strategy = config.strategy;
  trace.seed = config.seed;
  trace.epsilon = config.epsilon;
  trace.dataset.d = d;
  trace.z = random_positive_z(n, rng);

  Matrix u = haar_unitary(n, rng);
  int kappa = 1;
  int rank_prev = 0;
  FeasibleSetSpec spec;
  spec.d = d;
  // Targets are consistent by construction (true probabilities when
  // noiseless, ML-projected frequencies otherwise), so the data rows are
  // exact equalities rather than two-sided boxes.
  spec.eq_tol = 0.0;
  std::optional<double> s1;
  std::optional<Matrix> last_estimate;

  for (int k = 1; k <= max_steps; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    StepRecord step;
    step.k = k;
    step.kappa = kappa;
    step.rank_prev = rank_prev;

    MeasurementSetting setting = setting_from_rotation(u, kappa, d);
    if (config.subsystem_dims.has_value()) {
      setting.a = nearest_product_state(setting.a, *config.subsystem_dims);
      setting.b = nearest_product_state(setting.b, *config.subsystem_dims);
    }
    setting.k_index = k;
    setting.kappa = kappa;
    setting.origin = (config.strategy == Strategy::random || k == 1)
                         ? SettingOrigin::random
                         : SettingOrigin::adaptive;
    step.setting = setting;

    DataRecord rec;
    rec.setting = setting;
    rec.phi = phi_row(setting, d);
    double p_true = probability(chi_true, setting);
    Shot shot = sample_shot(p_true, config.noise, rng);
    rec.p_true = p_true;
    rec.count = shot.count;
    rec.copies = config.noise.copies;
    rec.nu = shot.nu;
    trace.dataset.records.push_back(rec);

    spec.rows.push_back(rec.phi);
    if (config.noise.kind == NoiseKind::none) {
      spec.targets.push_back(p_true);
    } else {
      // Physical projection of all frequencies observed so far.
      spec.targets = ml_probabilities(trace.dataset);
    }

    IccResult cert = icc(spec, trace.z, s1);
    if (cert.solver_status == SolverStatus::infeasible)
      throw std::runtime_error("run: certification infeasible at step " +
                               std::to_string(k));
    if (!s1.has_value()) s1 = cert.f_max - cert.f_min;
    step.s_cvx = cert.s_cvx;

    if (cert.s_cvx < config.epsilon) {
      trace.chi_final = cert.argmin_chi;
      step.fidelity = process_fidelity(trace.chi_final, chi_true);
      step.entropy = process_entropy(trace.chi_final);
      step.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
      trace.steps.push_back(step);
      trace.status = RunStatus::converged;
      trace.k_ic = k;
      return trace;
    }

    Matrix chi_est;
    if (config.strategy == Strategy::adaptive_minl1) {
      chi_est = min_l1_estimator(spec, u);
    } else {
      chi_est = min_entropy_estimator(spec, config.restarts);
    }
    last_estimate = chi_est;
    step.fidelity = process_fidelity(chi_est, chi_true);
    step.entropy = process_entropy(chi_est);

    int r = rank_estimate(chi_est, config.tau_rank);
    rank_prev = r;
    if (config.strategy == Strategy::random) {
      u = haar_unitary(n, rng);
      kappa = 1;
    } else {
      u = next_rotation(chi_est);
      kappa = pin_kappa ? 1 : (k % r) + 1;
    }

    step.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    trace.steps.push_back(step);
  }

  trace.status = RunStatus::max_steps;
  trace.k_ic = max_steps;
  trace.chi_final =
      last_estimate.has_value() ? *last_estimate : Matrix::Zero(n, n);
  return trace;
}

}  // namespace

RunTrace run(const RunConfig& config) {
  return run_impl(config, config.strategy == Strategy::adaptive_rank1);
}

RunTrace run_rank1_variant(const RunConfig& config) {
  if (config.strategy != Strategy::adaptive_rank1)
    throw std::invalid_argument("rank1 variant requires that strategy");
  return run_impl(config, true);
}

void write_trace_json(const RunTrace& trace, std::ostream& out,
                      bool include_wall) {
  json j;
  j["schema"] = "acqpt-trace/1";
  j["d"] = trace.d;
  j["strategy"] = to_string(trace.strategy);
  j["seed"] = std::to_string(trace.seed);
  j["epsilon"] = format_real(trace.epsilon);
  j["status"] = to_string(trace.status);
  j["k_ic"] = trace.k_ic;
  j["z"] = matrix_to_json(trace.z);
  j["chi_final"] = matrix_to_json(trace.chi_final);
  json steps = json::array();
  for (const StepRecord& s : trace.steps) {
    json sj;
    sj["k"] = s.k;
    sj["kappa"] = s.kappa;
    sj["rank_prev"] = s.rank_prev;
    sj["s_cvx"] = format_real(s.s_cvx);
    sj["fidelity"] = format_real(s.fidelity);
    sj["entropy"] = format_real(s.entropy);
    sj["origin"] = to_string(s.setting.origin);
    sj["a"] = ket_to_json(s.setting.a);
    sj["b"] = ket_to_json(s.setting.b);
    if (include_wall) sj["wall_ms"] = format_real(s.wall_ms);
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  out << j.dump(2) << '\n';
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "k,kappa,s_cvx,fidelity,entropy,status\n";
  for (const StepRecord& s : trace.steps) {
    out << s.k << ',' << s.kappa << ',' << format_real(s.s_cvx) << ','
        << format_real(s.fidelity) << ',' << format_real(s.entropy) << ','
        << to_string(trace.status) << '\n';
  }
}

namespace {

Vector ket_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Index>(i)] =
        Complex(std::stod(arr[i][0].get<std::string>()),
                std::stod(arr[i][1].get<std::string>()));
  return v;
}

Matrix matrix_from_json(const json& rows) {
  const Index n = static_cast<Index>(rows.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j)
      m(i, j) = Complex(
          std::stod(row[static_cast<std::size_t>(j)][0].get<std::string>()),
          std::stod(row[static_cast<std::size_t>(j)][1].get<std::string>()));
  }
  return m;
}

}  // namespace

RunTrace read_trace_json(std::istream& in) {
  json j = json::parse(in);
  if (j.value("schema", "") != "acqpt-trace/1")
    throw std::invalid_argument("trace: unknown schema");
  RunTrace trace;
  trace.d = j.at("d").get<Index>();
  trace.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  trace.seed = std::stoull(j.at("seed").get<std::string>());
  trace.epsilon = std::stod(j.at("epsilon").get<std::string>());
  trace.status = j.at("status").get<std::string>() == "converged"
                     ? RunStatus::converged
                     : RunStatus::max_steps;
  trace.k_ic = j.at("k_ic").get<int>();
  trace.z = matrix_from_json(j.at("z"));
  trace.chi_final = matrix_from_json(j.at("chi_final"));
  trace.dataset.d = trace.d;
  for (const json& sj : j.at("steps")) {
    StepRecord s;
    s.k = sj.at("k").get<int>();
    s.kappa = sj.at("kappa").get<int>();
    s.rank_prev = sj.at("rank_prev").get<int>();
    s.s_cvx = std::stod(sj.at("s_cvx").get<std::string>());
    s.fidelity = std::stod(sj.at("fidelity").get<std::string>());
    s.entropy = std::stod(sj.at("entropy").get<std::string>());
    s.setting.origin =
        setting_origin_from_string(sj.at("origin").get<std::string>());
    s.setting.a = ket_from_json(sj.at("a"));
    s.setting.b = ket_from_json(sj.at("b"));
    s.setting.k_index = s.k;
    s.setting.kappa = s.kappa;
    if (sj.contains("wall_ms"))
      s.wall_ms = std::stod(sj.at("wall_ms").get<std::string>());
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

}  // namespace acqpt
