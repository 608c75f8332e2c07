// include/svtk/plda.h

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

#ifndef SVTK_PLDA_H_
#define SVTK_PLDA_H_

#include <string>

#include <Eigen/Dense>

namespace svtk {

/**
   Two-covariance PLDA.  An embedding is x = mu + y + e with speaker
   variable y ~ N(0, Sigma_b) and residual e ~ N(0, Sigma_w).  For a trial
   (a, b) the log-likelihood ratio compares "same speaker",

     [a; b] ~ N([mu; mu], [[T, B], [B, T]]),   T = Sigma_b + Sigma_w, B = Sigma_b

   against "different speakers", a and b independently N(mu, T).  Writing
   S = T - B T^{-1} B (the Schur complement), x = a - mu, y = b - mu:

     llr = 1/2 x'Qx + 1/2 y'Qy + x'Py + c
     Q = T^{-1} - S^{-1},   P = T^{-1} B S^{-1},   c = 1/2 (logdet T - logdet S)

   Q, P and c are computed once in the constructor, so each trial costs
   O(d^2).
*/
class Plda {
 public:
  /// Throws NonPositiveDefinite unless sigma_w is positive definite,
  /// sigma_b is positive semidefinite and both are symmetric.
  Plda(Eigen::VectorXd mean, Eigen::MatrixXd between, Eigen::MatrixXd within);

  int Dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd &Mean() const { return mean_; }
  const Eigen::MatrixXd &Between() const { return between_; }
  const Eigen::MatrixXd &Within() const { return within_; }

  double LogLikelihoodRatio(const Eigen::VectorXd &a,
                            const Eigen::VectorXd &b) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd between_, within_;
  Eigen::MatrixXd quad_, cross_;
  double constant_ = 0.0;
};

/// Text model file: "PLDA d", then "mu" and d values, then "sigma_b" and
/// d x d values, then "sigma_w" and d x d values; whitespace separated.
Plda ReadPlda(const std::string &path);
void WritePlda(const Plda &plda, const std::string &path);

}  // namespace svtk

#endif  // SVTK_PLDA_H_
