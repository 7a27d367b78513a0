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

#include "acqpt/tomography.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace acqpt {

std::string to_string(SettingOrigin origin) {
  switch (origin) {
    case SettingOrigin::adaptive: return "adaptive";
    case SettingOrigin::random: return "random";
    case SettingOrigin::manual: return "manual";
  }
  throw std::logic_error("to_string: bad origin");
}

SettingOrigin setting_origin_from_string(const std::string& s) {
  if (s == "adaptive") return SettingOrigin::adaptive;
  if (s == "random") return SettingOrigin::random;
  if (s == "manual") return SettingOrigin::manual;
  throw std::invalid_argument("setting_origin_from_string: " + s);
}

MeasurementSetting setting_from_rotation(const Matrix& u, int kappa, Index d) {
  if (u.rows() != d * d || u.cols() != d * d)
    throw std::invalid_argument("setting_from_rotation: bad rotation size");
  if (kappa < 1 || kappa > d * d)
    throw std::invalid_argument("setting_from_rotation: kappa out of range");
  Matrix bp = unflatten_row_major(u.col(kappa - 1), d, d);
  Rank1 r = leading_rank1(bp);
  MeasurementSetting s;
  s.a = r.right;
  s.b = r.left;
  s.kappa = kappa;
  return s;
}

Vector probe_vector(const MeasurementSetting& setting) {
  return flatten_row_major(setting.b * setting.a.adjoint());
}

Vector phi_row(const MeasurementSetting& setting, Index d) {
  Vector v = probe_vector(setting);
  if (v.size() != d * d)
    throw std::invalid_argument("phi_row: setting dimension mismatch");
  const Index n = d * d;
  Vector row(n * n);
  for (Index m = 0; m < n; ++m)
    for (Index nn = 0; nn < n; ++nn)
      row[m * n + nn] = std::conj(v[m]) * v[nn];
  return row;
}

double phi_dot_chi(const Vector& phi, const Matrix& chi) {
  const Index n = chi.rows();
  if (phi.size() != n * n)
    throw std::invalid_argument("phi_dot_chi: size mismatch");
  Complex acc(0.0, 0.0);
  for (Index m = 0; m < n; ++m)
    for (Index nn = 0; nn < n; ++nn) acc += phi[m * n + nn] * chi(m, nn);
  return acc.real();
}

double probability(const Matrix& chi, const MeasurementSetting& setting) {
  Vector v = probe_vector(setting);
  if (v.size() != chi.rows())
    throw std::invalid_argument("probability: dimension mismatch");
  double p = (v.adjoint() * chi * v)(0, 0).real();
  if (p < 0.0) {
    if (p < -1e-9) throw std::invalid_argument("probability: negative value");
    p = 0.0;
  }
  return std::min(p, 1.0);
}

Matrix unitary_completion(const Vector& first_col) {
  const Index d = first_col.size();
  Matrix u(d, d);
  u.col(0) = first_col / first_col.norm();
  Index filled = 1;
  for (Index cand = 0; cand < d && filled < d; ++cand) {
    Vector v = Vector::Zero(d);
    v[cand] = 1.0;
    for (Index c = 0; c < filled; ++c) v -= u.col(c).dot(v) * u.col(c);
    double norm = v.norm();
    if (norm < 1e-8) continue;
    u.col(filled++) = v / norm;
  }
  if (filled != d)
    throw std::logic_error("unitary_completion: basis completion failed");
  return u;
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

using json = nlohmann::ordered_json;

json ket_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i)
    arr.push_back({format_real(v[i].real()), format_real(v[i].imag())});
  return arr;
}

Vector ket_from_json(const json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Index>(i)] =
        Complex(std::stod(arr[i][0].get<std::string>()),
                std::stod(arr[i][1].get<std::string>()));
  return v;
}

}  // namespace

void write_dataset_jsonl(const Dataset& dataset, std::ostream& out) {
  for (const DataRecord& rec : dataset.records) {
    json j;
    j["k"] = rec.setting.k_index;
    j["kappa"] = rec.setting.kappa;
    j["origin"] = to_string(rec.setting.origin);
    j["a"] = ket_to_json(rec.setting.a);
    j["b"] = ket_to_json(rec.setting.b);
    if (rec.p_true) j["p_true"] = format_real(*rec.p_true);
    if (rec.count) j["count"] = *rec.count;
    if (rec.copies) j["N"] = *rec.copies;
    if (rec.nu) j["nu"] = format_real(*rec.nu);
    out << j.dump() << '\n';
  }
}

Dataset read_dataset_jsonl(std::istream& in, Index d) {
  Dataset dataset;
  dataset.d = d;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    DataRecord rec;
    rec.setting.k_index = j.at("k").get<int>();
    rec.setting.kappa = j.at("kappa").get<int>();
    rec.setting.origin =
        setting_origin_from_string(j.at("origin").get<std::string>());
    rec.setting.a = ket_from_json(j.at("a"));
    rec.setting.b = ket_from_json(j.at("b"));
    if (j.contains("p_true"))
      rec.p_true = std::stod(j["p_true"].get<std::string>());
    if (j.contains("count")) rec.count = j["count"].get<std::int64_t>();
    if (j.contains("N")) rec.copies = j["N"].get<std::int64_t>();
    if (j.contains("nu")) rec.nu = std::stod(j["nu"].get<std::string>());
    rec.phi = phi_row(rec.setting, d);
    dataset.records.push_back(std::move(rec));
  }
  return dataset;
}

}  // namespace acqpt
