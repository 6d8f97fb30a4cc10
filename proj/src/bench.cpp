#include "gevo/bench.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <sstream>
#include <stdexcept>

namespace gevo {

CostModel fit_model(const std::vector<BenchSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit_model: no samples");
  const std::size_t d = samples.front().predictors.size();
  if (d == 0) throw std::invalid_argument("fit_model: samples have no predictors");
  for (const auto& s : samples) {
    if (s.predictors.size() != d) {
      throw std::invalid_argument("fit_model: inconsistent predictor dimensions");
    }
  }
  if (samples.size() < 10 * d) {
    throw std::invalid_argument("fit_model: need at least 10x more samples than coefficients");
  }

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, static_cast<Eigen::Index>(j)) = samples[i].predictors[j];
    y(i) = samples[i].ns;
  }

  CostModel model;
  model.samples = samples.size();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(d)) {
    model.singular = true;
    double total_pred = 0, total_ns = 0;
    for (const auto& s : samples) {
      double p = 0;
      for (double v : s.predictors) p += v;
      total_pred += p;
      total_ns += s.ns;
    }
    model.fallback_per_node = total_pred > 0 ? total_ns / total_pred : 0;
    model.coeffs.assign(d, model.fallback_per_node);
    return model;
  }
  Eigen::VectorXd beta = qr.solve(y);
  model.coeffs.assign(beta.data(), beta.data() + beta.size());
  const double ss_res = (y - x * beta).squaredNorm();
  const double ss_tot = y.squaredNorm();  // no-intercept convention
  model.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  return model;
}

std::string bench_samples_to_jsonl(const std::vector<BenchSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    nlohmann::json j;
    j["op"] = s.op;
    j["predictors"] = s.predictors;
    j["ns"] = s.ns;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchSample> bench_samples_from_jsonl(const std::string& text) {
  std::vector<BenchSample> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    BenchSample s;
    s.op = j.at("op").get<std::string>();
    s.predictors = j.at("predictors").get<std::vector<double>>();
    s.ns = j.at("ns").get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

const std::vector<std::string>& predictor_names(const std::string& op, std::size_t d) {
  static const std::vector<std::string> one = {"n"};
  static const std::vector<std::string> two = {"n", "m"};
  static const std::vector<std::string> four = {"n1", "n2", "m1", "m2"};
  if (op == "mutate" && d == 2) return two;
  if (op == "crossover" && d == 4) return four;
  return one;
}

}  // namespace

std::string bench_report(const std::vector<BenchSample>& samples, const std::string& label) {
  std::map<std::string, std::vector<BenchSample>> by_op;
  for (const auto& s : samples) by_op[s.op].push_back(s);
  std::ostringstream out;
  out << label << "\n";
  for (const auto& [op, group] : by_op) {
    out << "  " << op << ": ";
    try {
      const CostModel m = fit_model(group);
      if (m.singular) {
        out << "singular design; mean " << m.fallback_per_node << " ns/node";
      } else {
        const auto& names = predictor_names(op, m.coeffs.size());
        for (std::size_t i = 0; i < m.coeffs.size(); ++i) {
          if (i) out << " + ";
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.2f", m.coeffs[i]);
          out << buf << (i < names.size() ? names[i] : "p" + std::to_string(i));
        }
        char r2[32];
        std::snprintf(r2, sizeof r2, "%.3f", m.r2);
        out << " ns  (R^2=" << r2 << ", samples=" << m.samples << ")";
      }
    } catch (const std::exception& e) {
      out << "unavailable (" << e.what() << ")";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace gevo
