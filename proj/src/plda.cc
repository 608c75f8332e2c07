// src/plda.cc

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

#include "svtk/plda.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "svtk/corpus-io.h"
#include "svtk/error.h"

namespace svtk {

namespace {

double LogDetFromLlt(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::LLT<Eigen::MatrixXd> Factor(const Eigen::MatrixXd &m,
                                   const std::string &what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::kNonPositiveDefinite, what);
  Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite())
    throw Error(ErrorKind::kNonPositiveDefinite, what);
  return llt;
}

void CheckSymmetric(const Eigen::MatrixXd &m, const std::string &what) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorKind::kNonPositiveDefinite, what + " is not symmetric");
}

}  // namespace

Plda::Plda(Eigen::VectorXd mean, Eigen::MatrixXd between,
           Eigen::MatrixXd within)
    : mean_(std::move(mean)),
      between_(std::move(between)),
      within_(std::move(within)) {
  const Eigen::Index d = mean_.size();
  if (d < 1)
    throw Error(ErrorKind::kInvalidDimension, "PLDA dimension must be >= 1");
  if (between_.rows() != d || between_.cols() != d || within_.rows() != d ||
      within_.cols() != d)
    throw Error(ErrorKind::kDimensionMismatch,
                "PLDA covariances must be " + std::to_string(d) + "x" +
                    std::to_string(d));
  if (!mean_.allFinite() || !between_.allFinite() || !within_.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "PLDA parameters");
  CheckSymmetric(between_, "Sigma_b");
  CheckSymmetric(within_, "Sigma_w");
  between_ = 0.5 * (between_ + between_.transpose()).eval();
  within_ = 0.5 * (within_ + within_.transpose()).eval();

  Factor(within_, "Sigma_w");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(between_,
                                                     Eigen::EigenvaluesOnly);
  double tol = 1e-10 * std::max(1.0, between_.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -tol)
    throw Error(ErrorKind::kNonPositiveDefinite,
                "Sigma_b has a negative eigenvalue");

  const Eigen::MatrixXd total = between_ + within_;
  auto total_llt = Factor(total, "Sigma_b + Sigma_w");
  const Eigen::MatrixXd total_inv =
      total_llt.solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd schur = total - between_ * total_inv * between_;
  schur = 0.5 * (schur + schur.transpose()).eval();
  auto schur_llt = Factor(schur, "Schur complement of the joint covariance");
  const Eigen::MatrixXd schur_inv =
      schur_llt.solve(Eigen::MatrixXd::Identity(d, d));

  quad_ = total_inv - schur_inv;
  quad_ = 0.5 * (quad_ + quad_.transpose()).eval();
  cross_ = total_inv * between_ * schur_inv;
  cross_ = 0.5 * (cross_ + cross_.transpose()).eval();
  constant_ = 0.5 * (LogDetFromLlt(total_llt) - LogDetFromLlt(schur_llt));
}

double Plda::LogLikelihoodRatio(const Eigen::VectorXd &a,
                                const Eigen::VectorXd &b) const {
  if (a.size() != mean_.size() || b.size() != mean_.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding dimension does not match the PLDA model");
  Eigen::VectorXd x = a - mean_, y = b - mean_;
  return 0.5 * x.dot(quad_ * x) + 0.5 * y.dot(quad_ * y) +
         x.dot(cross_ * y) + constant_;
}

Plda ReadPlda(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::string token;
  auto expect = [&](const std::string &want) {
    if (!(is >> token) || token != want)
      throw Error(ErrorKind::kMalformedHeader,
                  path + ": expected '" + want + "'");
  };
  auto number = [&]() {
    if (!(is >> token))
      throw Error(ErrorKind::kMalformedHeader, path + ": truncated model");
    std::optional<double> v = ParseReal(token);
    if (!v)
      throw Error(ErrorKind::kMalformedHeader,
                  path + ": bad number '" + token + "'");
    return *v;
  };
  expect("PLDA");
  double dim_value = number();
  if (dim_value < 1 || dim_value != std::floor(dim_value) || dim_value > 1e6)
    throw Error(ErrorKind::kMalformedHeader, path + ": bad dimension");
  const int d = static_cast<int>(dim_value);
  Eigen::VectorXd mean(d);
  Eigen::MatrixXd between(d, d), within(d, d);
  expect("mu");
  for (int i = 0; i < d; i++) mean[i] = number();
  expect("sigma_b");
  for (int i = 0; i < d; i++)
    for (int j = 0; j < d; j++) between(i, j) = number();
  expect("sigma_w");
  for (int i = 0; i < d; i++)
    for (int j = 0; j < d; j++) within(i, j) = number();
  if (is >> token)
    throw Error(ErrorKind::kMalformedHeader,
                path + ": trailing content '" + token + "'");
  return Plda(mean, between, within);
}

void WritePlda(const Plda &plda, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kUnwritablePath, path);
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    os << buf;
  };
  const int d = plda.Dim();
  os << "PLDA " << d << "\nmu";
  for (int i = 0; i < d; i++) put(plda.Mean()[i]);
  os << "\nsigma_b\n";
  for (int i = 0; i < d; i++) {
    for (int j = 0; j < d; j++) put(plda.Between()(i, j));
    os << '\n';
  }
  os << "sigma_w\n";
  for (int i = 0; i < d; i++) {
    for (int j = 0; j < d; j++) put(plda.Within()(i, j));
    os << '\n';
  }
  os.flush();
  if (!os) throw Error(ErrorKind::kUnwritablePath, path + ": write failed");
}

}  // namespace svtk
