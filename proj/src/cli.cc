// src/cli.cc

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

#include "svtk/cli.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <unordered_set>

#include "CLI11.hpp"
#include "svtk/augment.h"
#include "svtk/calibration.h"
#include "svtk/corpus-io.h"
#include "svtk/error.h"
#include "svtk/metrics.h"
#include "svtk/plda.h"
#include "svtk/scoring.h"

namespace svtk {

namespace {

std::string Sig(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

EmbeddingSet LoadEmbeddingsAuto(const std::string &path,
                                const std::string &format) {
  if (format == "binary") return LoadEmbeddings(path, EmbeddingFormat::kBinary);
  if (format == "text") return LoadEmbeddings(path, EmbeddingFormat::kText);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  is.read(magic, 4);
  bool binary = is.gcount() == 4 && std::string(magic, 4) == "EMB1";
  return LoadEmbeddings(path,
                        binary ? EmbeddingFormat::kBinary : EmbeddingFormat::kText);
}

struct BackendOptions {
  std::string backend = "cosine";
  std::string plda_model;
  std::string strategy = "ea";
  std::string embedding_format = "auto";
  int threads = 0;

  void Register(CLI::App *app) {
    app->add_option("--backend", backend, "Scoring backend")
        ->check(CLI::IsMember({"cosine", "plda"}))
        ->capture_default_str();
    app->add_option("--plda-model", plda_model,
                    "PLDA model file (text), required with --backend plda");
    app->add_option("--strategy", strategy,
                    "Segment strategy: single, ea (embedding average), msa "
                    "(matrix score average), ea-msa (mean of both)")
        ->check(CLI::IsMember({"single", "ea", "msa", "ea-msa"}))
        ->capture_default_str();
    app->add_option("--embedding-format", embedding_format,
                    "auto detects the EMB1 magic")
        ->check(CLI::IsMember({"auto", "binary", "text"}))
        ->capture_default_str();
    app->add_option("--threads", threads,
                    "Scoring threads, 0 = machine parallelism")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  ScoringBackend Make() const {
    if (backend == "plda") {
      if (plda_model.empty())
        throw Error(ErrorKind::kInvalidArgument,
                    "--backend plda needs --plda-model");
      return ScoringBackend::WithPlda(
          std::make_shared<const Plda>(ReadPlda(plda_model)));
    }
    return ScoringBackend::Cosine();
  }
};

std::vector<ScoreSet> LoadAll(const std::vector<std::string> &paths) {
  std::vector<ScoreSet> out;
  for (const std::string &p : paths) out.push_back(LoadScores(p));
  return out;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Speaker verification scoring, normalisation, calibration and "
               "evaluation toolkit.",
               "svtk"};
  app.require_subcommand(1);

  // score
  CLI::App *score = app.add_subcommand("score", "Score a trial list");
  std::string emb_path, trials_path, out_path;
  BackendOptions score_backend;
  score->add_option("--embeddings", emb_path, "Embedding file")->required();
  score->add_option("--trials", trials_path, "Trial list")->required();
  score->add_option("--out", out_path, "Output score file")->required();
  score_backend.Register(score);

  // asnorm
  CLI::App *asnorm =
      app.add_subcommand("asnorm", "Adaptive symmetric score normalisation");
  std::string as_scores, as_emb, as_cohort, as_out;
  int topk = kDefaultTopK;
  BackendOptions as_backend;
  asnorm->add_option("--scores", as_scores, "Raw score file")->required();
  asnorm->add_option("--embeddings", as_emb,
                     "Embeddings of every utterance in the score file")
      ->required();
  asnorm->add_option("--cohort", as_cohort, "Cohort embedding file")
      ->required();
  asnorm->add_option("--topk", topk, "Cohort scores kept per side")
      ->capture_default_str();
  asnorm->add_option("--out", as_out, "Output score file")->required();
  as_backend.Register(asnorm);

  // eval
  CLI::App *eval = app.add_subcommand("eval", "Compute EER / minDCF / Cllr");
  std::string ev_scores, ev_trials, det_path;
  DcfParams dcf;
  bool kv = false;
  eval->add_option("--scores", ev_scores, "Score file")->required();
  eval->add_option("--trials", ev_trials, "Labeled trial list")->required();
  eval->add_option("--ptarget", dcf.p_target, "Target prior")
      ->capture_default_str();
  eval->add_option("--cmiss", dcf.c_miss, "Miss cost")->capture_default_str();
  eval->add_option("--cfa", dcf.c_fa, "False alarm cost")
      ->capture_default_str();
  eval->add_option("--det", det_path,
                   "Write DET points (threshold p_miss p_fa) to this file");
  eval->add_flag("--kv", kv, "Print key=value lines at full precision");

  // calibrate
  CLI::App *calibrate = app.add_subcommand(
      "calibrate", "Fit a linear calibration / fusion model");
  std::vector<std::string> cal_scores;
  std::string cal_trials, cal_out;
  double prior = 0.05;
  calibrate->add_option("--scores", cal_scores, "One score file per system")
      ->required();
  calibrate->add_option("--trials", cal_trials, "Labeled trial list")
      ->required();
  calibrate->add_option("--prior", prior, "Effective target prior")
      ->capture_default_str();
  calibrate->add_option("--out", cal_out, "Model file")->required();

  // fuse
  CLI::App *fuse = app.add_subcommand("fuse", "Apply a fusion model");
  std::vector<std::string> fuse_scores;
  std::string fuse_model, fuse_out;
  std::vector<double> fuse_weights;
  fuse->add_option("--scores", fuse_scores, "One score file per system")
      ->required();
  CLI::Option *model_opt =
      fuse->add_option("--model", fuse_model, "Model from 'calibrate'");
  CLI::Option *weights_opt =
      fuse->add_option("--weights", fuse_weights,
                       "Manual weights, comma separated")
          ->delimiter(',');
  model_opt->excludes(weights_opt);
  fuse->add_option("--out", fuse_out, "Output score file")->required();

  // augment
  CLI::App *augment = app.add_subcommand("augment", "Data augmentation");
  augment->require_subcommand(1);
  uint64_t seed = 0;
  std::string aug_in, aug_out;
  double sample_rate = 16000.0;
  auto common = [&](CLI::App *sub) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--in", aug_in, "Input raw float32 file")->required();
    sub->add_option("--out", aug_out, "Output raw float32 file")->required();
    sub->add_option("--sample-rate", sample_rate, "Sample rate in Hz")
        ->capture_default_str();
  };
  CLI::App *specaug = augment->add_subcommand(
      "specaug", "Time/frequency masking and time warping of features");
  SpecAugConfig sa;
  int num_bins = 0;
  common(specaug);
  specaug->add_option("--num-bins", num_bins, "Feature bins per frame")
      ->required();
  specaug->add_option("--time-masks", sa.num_time_masks)->capture_default_str();
  specaug->add_option("--max-time", sa.max_time_width)->capture_default_str();
  specaug->add_option("--freq-masks", sa.num_freq_masks)->capture_default_str();
  specaug->add_option("--max-freq", sa.max_freq_width)->capture_default_str();
  specaug->add_option("--warp", sa.warp_window)->capture_default_str();
  CLI::App *noise = augment->add_subcommand("noise", "Additive noise at SNR");
  std::string noise_path;
  double snr = 0.0;
  common(noise);
  noise->add_option("--noise", noise_path, "Noise raw file")->required();
  noise->add_option("--snr", snr, "Target SNR in dB")->required();
  CLI::App *reverb = augment->add_subcommand("reverb", "Convolve with a RIR");
  std::string rir_path;
  common(reverb);
  reverb->add_option("--rir", rir_path, "Impulse response raw file")
      ->required();
  CLI::App *speed = augment->add_subcommand("speed", "Speed perturbation");
  double factor = 1.0;
  common(speed);
  speed->add_option("--factor", factor, "Speed factor, e.g. 0.9 or 1.1")
      ->required();

  std::vector<const char *> argv{"svtk"};
  for (const std::string &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    if (code == 0) return 0;
    err << app.help();
    return 2;
  }
  if (fuse->parsed() && !*model_opt && !*weights_opt) {
    err << "svtk: fuse needs --model or --weights\n" << fuse->help();
    return 2;
  }

  try {
    if (score->parsed()) {
      EmbeddingSet embs =
          LoadEmbeddingsAuto(emb_path, score_backend.embedding_format);
      TrialList trials = LoadTrials(trials_path);
      ScoreSet scores =
          ScoreTrials(embs, trials, score_backend.Make(),
                      ParseStrategy(score_backend.strategy),
                      score_backend.threads);
      WriteScores(scores, out_path);
    } else if (asnorm->parsed()) {
      ScoreSet raw = LoadScores(as_scores);
      EmbeddingSet embs = LoadEmbeddingsAuto(as_emb, as_backend.embedding_format);
      EmbeddingSet cohort =
          LoadEmbeddingsAuto(as_cohort, as_backend.embedding_format);
      std::vector<std::string> ids;
      std::unordered_set<std::string> seen;
      for (const ScoreEntry &e : raw)
        for (const std::string *id : {&e.enroll, &e.test})
          if (seen.insert(*id).second) ids.push_back(*id);
      CohortScores cs =
          BuildCohortScores(embs, ids, cohort, as_backend.Make(),
                            ParseStrategy(as_backend.strategy),
                            as_backend.threads);
      int clamped = 0;
      ScoreSet norm = AsNorm(raw, cs, cs, topk, &clamped);
      if (clamped > 0)
        err << "svtk: warning: top-K " << topk << " exceeds the cohort size "
            << cohort.NumUtterances() << "; using all cohort scores\n";
      WriteScores(norm, as_out);
    } else if (eval->parsed()) {
      ScoreSet scores = LoadScores(ev_scores);
      TrialList trials = LoadTrials(ev_trials);
      LabeledScores ls = SplitByLabel(scores, trials);
      OperatingPoint eer = ComputeEer(ls);
      OperatingPoint min_dcf = ComputeMinDcf(ls, dcf);
      if (kv) {
        out << "eer=" << Sig(eer.value, 17) << '\n'
            << "eer_threshold=" << Sig(eer.threshold, 17) << '\n'
            << "min_dcf=" << Sig(min_dcf.value, 17) << '\n'
            << "min_dcf_threshold=" << Sig(min_dcf.threshold, 17) << '\n'
            << "act_dcf=" << Sig(ComputeActDcf(ls, dcf, BayesThreshold(dcf)), 17)
            << '\n'
            << "cllr=" << Sig(ComputeCllr(ls), 17) << '\n'
            << "num_target=" << ls.target.size() << '\n'
            << "num_nontarget=" << ls.nontarget.size() << '\n';
      } else {
        out << "EER(%) " << Sig(100.0 * eer.value, 6) << " minDCF "
            << Sig(min_dcf.value, 6) << " threshold "
            << Sig(eer.threshold, 6) << '\n';
      }
      if (!det_path.empty()) {
        std::ofstream os(det_path);
        if (!os) throw Error(ErrorKind::kUnwritablePath, det_path);
        for (const DetPoint &p : DetCurve(ls))
          os << Sig(p.threshold, 17) << ' ' << Sig(p.p_miss, 17) << ' '
             << Sig(p.p_fa, 17) << '\n';
        if (!os) throw Error(ErrorKind::kUnwritablePath, det_path);
      }
    } else if (calibrate->parsed()) {
      TrialList trials = LoadTrials(cal_trials);
      SystemScores data = StackSystems(LoadAll(cal_scores), &trials);
      CalibrationOptions opts;
      opts.prior = prior;
      CalibrationFit fit = FitCalibration(data, opts);
      if (!fit.converged)
        err << "svtk: warning: calibration did not converge after "
            << fit.iterations << " iterations\n";
      WriteCalibrationModel(fit.model, cal_out);
      out << "objective=" << Sig(fit.objective, 17)
          << " iterations=" << fit.iterations << '\n';
    } else if (fuse->parsed()) {
      std::vector<ScoreSet> systems = LoadAll(fuse_scores);
      SystemScores data = StackSystems(systems);
      std::vector<double> fused =
          fuse_model.empty()
              ? ManualFusion(fuse_weights, data)
              : ApplyCalibration(ReadCalibrationModel(fuse_model), data);
      WriteScores(WithKeys(systems.front(), fused), fuse_out);
    } else if (specaug->parsed()) {
      FeatureMatrix feats = ReadRawFeatures(aug_in, num_bins);
      WriteRawFeatures(SpecAugment(feats, sa, seed).features, aug_out);
    } else if (noise->parsed()) {
      Waveform in = ReadRawWaveform(aug_in, sample_rate);
      Waveform n = ReadRawWaveform(noise_path, sample_rate);
      WriteRawWaveform(MixAtSnr(in, n, snr), aug_out);
    } else if (reverb->parsed()) {
      Waveform in = ReadRawWaveform(aug_in, sample_rate);
      Waveform rir = ReadRawWaveform(rir_path, sample_rate);
      WriteRawWaveform(Reverberate(in, rir), aug_out);
    } else if (speed->parsed()) {
      Waveform in = ReadRawWaveform(aug_in, sample_rate);
      WriteRawWaveform(SpeedPerturb(in, factor), aug_out);
    }
  } catch (const std::exception &e) {
    err << "svtk: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace svtk
