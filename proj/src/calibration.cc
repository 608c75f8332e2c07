// src/calibration.cc

// Copyright 2026  The svtk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "svtk/calibration.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "svtk/error.h"

namespace svtk {

namespace {

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

void CheckPrior(double prior) {
  if (!(prior > 0.0 && prior < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "prior must lie in (0, 1)");
}

void CheckTrainingData(const SystemScores &data) {
  if (data.NumSystems() < 1)
    throw Error(ErrorKind::kInvalidArgument, "no systems to calibrate");
  if (data.is_target.size() != data.NumTrials())
    throw Error(ErrorKind::kInvalidArgument,
                "calibration needs a label for every trial");
  for (Eigen::Index i = 0; i < data.scores.rows(); i++)
    if (!data.scores.row(i).allFinite())
      throw Error(ErrorKind::kNonFiniteScores, "trial row",
                  static_cast<int64_t>(i) + 1);
  size_t nt = 0;
  for (bool t : data.is_target) nt += t;
  if (nt == 0 || nt == data.is_target.size())
    throw Error(ErrorKind::kSingleClassLabels,
                nt == 0 ? "no target trials" : "no nontarget trials");
}

// Objective, gradient and Hessian over theta = [w; b].
struct Evaluation {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

class Objective {
 public:
  Objective(const SystemScores &data, double prior, double ridge)
      : data_(data), prior_(prior), ridge_(ridge),
        logit_(std::log(prior / (1.0 - prior))) {
    for (bool t : data.is_target) (t ? num_tar_ : num_non_)++;
  }

  double Value(const Eigen::VectorXd &theta) const {
    return Evaluate(theta, false).value;
  }

  Evaluation Evaluate(const Eigen::VectorXd &theta, bool derivatives) const {
    const int s = data_.NumSystems();
    const Eigen::VectorXd w = theta.head(s);
    const double b = theta[s];
    const double wt = prior_ / num_tar_, wn = (1.0 - prior_) / num_non_;
    Eigen::VectorXd f = data_.scores * w;

    Evaluation e;
    double tar = 0.0, non = 0.0;
    if (derivatives) {
      e.grad = Eigen::VectorXd::Zero(s + 1);
      e.hess = Eigen::MatrixXd::Zero(s + 1, s + 1);
    }
    Eigen::VectorXd z(s + 1);
    for (Eigen::Index i = 0; i < f.size(); i++) {
      const double a = f[i] + b + logit_;
      const bool is_tar = data_.is_target[i];
      if (is_tar)
        tar += Softplus(-a);
      else
        non += Softplus(a);
      if (!derivatives) continue;
      z.head(s) = data_.scores.row(i).transpose();
      z[s] = 1.0;
      const double p = Sigmoid(a), q = Sigmoid(-a);
      const double g = is_tar ? -wt * q : wn * p;
      const double h = (is_tar ? wt : wn) * p * q;
      e.grad += g * z;
      e.hess.selfadjointView<Eigen::Lower>().rankUpdate(z, h);
    }
    e.value = wt * tar + wn * non + ridge_ * w.squaredNorm();
    if (derivatives) {
      e.hess = e.hess.selfadjointView<Eigen::Lower>();
      e.grad.head(s) += 2.0 * ridge_ * w;
      e.hess.topLeftCorner(s, s).diagonal().array() += 2.0 * ridge_;
    }
    return e;
  }

 private:
  const SystemScores &data_;
  double prior_, ridge_, logit_;
  double num_tar_ = 0, num_non_ = 0;
};

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SystemScores StackSystems(const std::vector<ScoreSet> &systems,
                          const TrialList *trials) {
  if (systems.empty())
    throw Error(ErrorKind::kInvalidArgument, "no score sets given");
  const ScoreSet &ref = systems.front();
  if (trials) CheckAligned(ref, *trials);
  SystemScores out;
  out.scores.resize(static_cast<Eigen::Index>(ref.size()),
                    static_cast<Eigen::Index>(systems.size()));
  for (size_t s = 0; s < systems.size(); s++) {
    const ScoreSet &sys = systems[s];
    if (sys.size() != ref.size())
      throw Error(ErrorKind::kMisalignedScores,
                  "system " + std::to_string(s + 1) + " has " +
                      std::to_string(sys.size()) + " scores, expected " +
                      std::to_string(ref.size()));
    for (size_t i = 0; i < sys.size(); i++) {
      if (sys[i].enroll != ref[i].enroll || sys[i].test != ref[i].test)
        throw Error(ErrorKind::kMisalignedScores,
                    "system " + std::to_string(s + 1) + " entry (" +
                        sys[i].enroll + ", " + sys[i].test + ")",
                    static_cast<int64_t>(i) + 1);
      out.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          sys[i].score;
    }
  }
  if (trials && trials->Labeled())
    for (const Trial &t : trials->Trials()) out.is_target.push_back(*t.is_target);
  return out;
}

double CalibrationObjective(const SystemScores &data, double prior,
                            const Eigen::VectorXd &weights, double offset,
                            double ridge) {
  CheckPrior(prior);
  CheckTrainingData(data);
  if (weights.size() != data.NumSystems())
    throw Error(ErrorKind::kDimensionMismatch, "weight count");
  Eigen::VectorXd theta(weights.size() + 1);
  theta << weights, offset;
  return Objective(data, prior, ridge).Value(theta);
}

CalibrationFit FitCalibration(const SystemScores &data,
                              const CalibrationOptions &options) {
  CheckPrior(options.prior);
  CheckTrainingData(data);
  const int s = data.NumSystems();
  Objective objective(data, options.prior, options.ridge);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(s + 1);
  if (options.init) {
    if (options.init->weights.size() != s)
      throw Error(ErrorKind::kDimensionMismatch, "initial weight count");
    theta << options.init->weights, options.init->offset;
  }

  Evaluation cur = objective.Evaluate(theta, true);
  int iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; iter++) {
    if (cur.grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      converged = true;
      break;
    }
    Eigen::VectorXd step = cur.hess.ldlt().solve(-cur.grad);
    if (!step.allFinite()) step = -cur.grad;
    double alpha = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; halvings++, alpha *= 0.5) {
      Eigen::VectorXd cand = theta + alpha * step;
      double value = objective.Value(cand);
      if (value <= cur.value) {
        theta = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    cur = objective.Evaluate(theta, true);
  }
  if (!converged &&
      cur.grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance)
    converged = true;

  CalibrationFit fit;
  fit.model.weights = theta.head(s);
  fit.model.offset = theta[s];
  fit.model.prior = options.prior;
  fit.objective = cur.value;
  fit.iterations = iter;
  fit.converged = converged;
  return fit;
}

std::vector<double> ApplyCalibration(const CalibrationModel &model,
                                     const SystemScores &data) {
  if (model.weights.size() != data.NumSystems())
    throw Error(ErrorKind::kDimensionMismatch,
                "model has " + std::to_string(model.weights.size()) +
                    " weights for " + std::to_string(data.NumSystems()) +
                    " systems");
  std::vector<double> out(data.NumTrials());
  for (size_t i = 0; i < out.size(); i++)
    out[i] = data.scores.row(static_cast<Eigen::Index>(i)).dot(model.weights) +
             model.offset;
  return out;
}

std::vector<double> ManualFusion(const std::vector<double> &weights,
                                 const SystemScores &data) {
  CalibrationModel model;
  model.weights = Eigen::Map<const Eigen::VectorXd>(
      weights.data(), static_cast<Eigen::Index>(weights.size()));
  model.offset = 0.0;
  return ApplyCalibration(model, data);
}

void WriteCalibrationModel(const CalibrationModel &model,
                           const std::string &path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kUnwritablePath, path);
  os << "prior=" << FormatReal(model.prior) << '\n'
     << "offset=" << FormatReal(model.offset) << '\n'
     << "weights=";
  for (Eigen::Index i = 0; i < model.weights.size(); i++)
    os << (i ? "," : "") << FormatReal(model.weights[i]);
  os << '\n';
  os.flush();
  if (!os) throw Error(ErrorKind::kUnwritablePath, path + ": write failed");
}

CalibrationModel ReadCalibrationModel(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  CalibrationModel model;
  bool have_prior = false, have_offset = false, have_weights = false;
  std::string line;
  int64_t line_no = 0;
  auto number = [&](const std::string &text) {
    std::optional<double> v = ParseReal(text);
    if (!v || !std::isfinite(*v))
      throw Error(ErrorKind::kMalformedHeader,
                  path + ": bad number '" + text + "'", line_no);
    return *v;
  };
  while (std::getline(is, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::kMalformedHeader, path + ": expected key=value",
                  line_no);
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "prior") {
      model.prior = number(value);
      have_prior = true;
    } else if (key == "offset") {
      model.offset = number(value);
      have_offset = true;
    } else if (key == "weights") {
      std::vector<double> w;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) w.push_back(number(item));
      if (w.empty())
        throw Error(ErrorKind::kMalformedHeader, path + ": no weights",
                    line_no);
      model.weights =
          Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      have_weights = true;
    } else {
      throw Error(ErrorKind::kMalformedHeader, path + ": unknown key " + key,
                  line_no);
    }
  }
  if (!have_prior || !have_offset || !have_weights)
    throw Error(ErrorKind::kMalformedHeader,
                path + ": needs prior, offset and weights");
  CheckPrior(model.prior);
  return model;
}

ScoreSet WithKeys(const ScoreSet &like, const std::vector<double> &values) {
  if (like.size() != values.size())
    throw Error(ErrorKind::kDimensionMismatch, "score count");
  ScoreSet out = like;
  for (size_t i = 0; i < out.size(); i++) out[i].score = values[i];
  return out;
}

}  // namespace svtk
