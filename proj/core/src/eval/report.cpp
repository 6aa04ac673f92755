// Copyright 2026 The Hypnos Authors.
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

#include "hypnos/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hypnos/sequence/crf.hpp"

namespace hypnos::eval {

using nlohmann::json;

namespace {

std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Width counts code points so that "±" lines up.
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80 ? 1 : 0;
  return len >= width ? s : std::string(width - len, ' ') + s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

json stage_names(const std::vector<SleepStage>& stages) {
  json out = json::array();
  for (auto s : stages) out.push_back(std::string(stage_name(s)));
  return out;
}

}  // namespace

json metrics_json(const Metrics& m) {
  json f1 = json::object();
  for (int c = 0; c < kNumStages; ++c) f1[std::string(stage_name(stage_from_index(c)))] = m.per_class_f1[c];
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"kappa", m.kappa}, {"per_class_f1", f1}};
}

json fold_json(const FoldReport& f) {
  json per_subject = json::object();
  for (const auto& [id, m] : f.per_subject) per_subject[id] = metrics_json(m);
  return {{"record", "fold"},
          {"fold", f.fold},
          {"train_subjects", f.train_subjects},
          {"validation_subjects", f.validation_subjects},
          {"test_subjects", f.test_subjects},
          {"confusion", f.confusion.counts},
          {"metrics", metrics_json(f.metrics)},
          {"per_subject", per_subject}};
}

json aggregate_json(const Aggregate& a) {
  auto ms = [](const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.std}}; };
  json f1 = json::object();
  for (int c = 0; c < kNumStages; ++c) f1[std::string(stage_name(stage_from_index(c)))] = ms(a.per_class_f1[c]);
  return {{"record", "aggregate"},
          {"accuracy", ms(a.accuracy)},
          {"macro_f1", ms(a.macro_f1)},
          {"kappa", ms(a.kappa)},
          {"per_class_f1", f1}};
}

std::string format_fold_table(const std::vector<FoldReport>& folds, const Aggregate& a) {
  std::ostringstream out;
  const std::size_t w = 15;
  out << pad("fold", 6) << "  " << pad("ACC", w) << pad("MF1", w) << pad("kappa", w);
  for (auto s : kAllStages) out << pad(std::string(stage_name(s)), w);
  out << "  test subjects\n";
  for (const auto& f : folds) {
    out << pad(std::to_string(f.fold), 6) << "  " << pad(fixed(f.metrics.accuracy), w)
        << pad(fixed(f.metrics.macro_f1), w) << pad(fixed(f.metrics.kappa, 3), w);
    for (int c = 0; c < kNumStages; ++c) out << pad(fixed(f.metrics.per_class_f1[c]), w);
    out << "  " << join(f.test_subjects) << "\n";
  }
  out << pad("all", 6) << "  " << pad(format_mean_std(a.accuracy), w) << pad(format_mean_std(a.macro_f1), w)
      << pad(format_mean_std(a.kappa, 3), w);
  for (int c = 0; c < kNumStages; ++c) out << pad(format_mean_std(a.per_class_f1[c]), w);
  out << "\n";
  return out.str();
}

std::string format_stats_table(const std::string& name, const ingest::DatasetStats& s) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s epochs %zu  mean %.3g  std %.3g  range (%.3g, %.3g)\n", name.c_str(),
                s.total_epochs, s.mean, s.std, s.min, s.max);
  out << buf;
  const std::size_t labeled = s.total_epochs - s.unlabeled_epochs;
  for (int c = 0; c < kNumStages; ++c) {
    const auto count = s.stage_counts[c];
    const double pct = labeled > 0 ? 100.0 * static_cast<double>(count) / static_cast<double>(labeled) : 0.0;
    std::snprintf(buf, sizeof buf, "  %-4s %8zu (%.0f%%)\n", std::string(stage_name(stage_from_index(c))).c_str(),
                  count, pct);
    out << buf;
  }
  if (s.unlabeled_epochs > 0) out << "  unlabeled " << s.unlabeled_epochs << "\n";
  return out.str();
}

json worst_case_json(const WorstCaseEntry& e) {
  return {{"record", "worst_case"}, {"subject_id", e.subject_id}, {"fold", e.fold}, {"emd", e.emd},
          {"metrics", metrics_json(e.metrics)}};
}

std::string format_worst_case(const std::vector<WorstCaseEntry>& entries) {
  std::ostringstream out;
  out << pad("rank", 5) << "  " << pad("subject", 10) << pad("EMD", 12) << pad("ACC", 9) << pad("MF1", 9)
      << pad("kappa", 9) << "\n";
  double total = 0.0;
  char buf[32];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::snprintf(buf, sizeof buf, "%.3e", e.emd);
    out << pad(std::to_string(i + 1), 5) << "  " << pad(e.subject_id, 10) << pad(buf, 12)
        << pad(fixed(e.metrics.accuracy), 9) << pad(fixed(e.metrics.macro_f1), 9)
        << pad(fixed(e.metrics.kappa, 3), 9) << "\n";
    total += e.emd;
  }
  if (!entries.empty()) {
    std::snprintf(buf, sizeof buf, "%.3e", total / static_cast<double>(entries.size()));
    out << "average EMD " << buf << "\n";
  }
  return out.str();
}

json prediction_json(const SequencePrediction& p) {
  json j = {{"record", "sequence"},
            {"subject_id", p.subject_id},
            {"epoch_indices", p.epoch_indices},
            {"stages", stage_names(p.decoded.stages)},
            {"uncertainties", p.decoded.uncertainties},
            {"log_probability", p.decoded.log_probability}};
  if (p.truth) j["truth"] = stage_names(*p.truth);
  return j;
}

std::vector<json> epoch_records(const SequencePrediction& p, double threshold) {
  std::vector<json> out;
  for (std::size_t i = 0; i < p.decoded.stages.size(); ++i) {
    json j = {{"record", "epoch"},
              {"subject_id", p.subject_id},
              {"epoch_index", p.epoch_indices[i]},
              {"stage", std::string(stage_name(p.decoded.stages[i]))},
              {"uncertainty", p.decoded.uncertainties[i]},
              {"flagged", p.decoded.uncertainties[i] > threshold}};
    if (p.truth) j["truth"] = std::string(stage_name((*p.truth)[i]));
    out.push_back(std::move(j));
  }
  return out;
}

std::string uncertainty_plot_svg(const SequencePrediction& p, double threshold) {
  const std::size_t t = p.decoded.stages.size();
  const double step = 24.0;
  const double left = 60.0;
  const double track = 90.0;
  const double width = left + step * static_cast<double>(t) + 20.0;
  const int tracks = p.truth ? 3 : 2;
  const double height = 30.0 + track * tracks + 30.0;
  const double max_u = std::log(static_cast<double>(kNumStages));
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"16\" font-size=\"12\">" << p.subject_id << " epochs "
      << (p.epoch_indices.empty() ? 0 : p.epoch_indices.front()) << "-"
      << (p.epoch_indices.empty() ? 0 : p.epoch_indices.back()) << "</text>\n";

  // Stage tracks draw W at the top and N3 at the bottom, REM between W and N1.
  auto level = [](SleepStage s) {
    switch (s) {
      case SleepStage::kW: return 0;
      case SleepStage::kRem: return 1;
      case SleepStage::kN1: return 2;
      case SleepStage::kN2: return 3;
      case SleepStage::kN3: return 4;
    }
    return 0;
  };
  auto stage_track = [&](const std::vector<SleepStage>& stages, double top, const char* label, const char* color) {
    svg << "<text x=\"4\" y=\"" << top + track / 2 << "\">" << label << "</text>\n";
    const char* names[] = {"W", "REM", "N1", "N2", "N3"};
    for (int l = 0; l < kNumStages; ++l) {
      svg << "<text x=\"" << left - 26 << "\" y=\"" << top + 8 + 16 * l + 4 << "\" fill=\"#666\">" << names[l]
          << "</text>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const double y = top + 8 + 16 * level(stages[i]);
      svg << left + step * i << "," << y << " " << left + step * (i + 1) << "," << y << " ";
    }
    svg << "\"/>\n";
  };

  double top = 30.0;
  if (p.truth) {
    stage_track(*p.truth, top, "truth", "#333");
    top += track;
  }
  stage_track(p.decoded.stages, top, "predicted", "#1f5fbf");
  top += track;

  svg << "<text x=\"4\" y=\"" << top + track / 2 << "\">uncertainty</text>\n";
  const double bar_area = track - 16;
  for (std::size_t i = 0; i < t; ++i) {
    const double u = p.decoded.uncertainties[i];
    const double h = bar_area * std::clamp(u / max_u, 0.0, 1.0);
    const bool wrong = p.truth && (*p.truth)[i] != p.decoded.stages[i];
    svg << "<rect x=\"" << left + step * i + 3 << "\" y=\"" << top + bar_area - h << "\" width=\"" << step - 6
        << "\" height=\"" << h << "\" fill=\"" << (u > threshold ? "#d62728" : "#999") << "\""
        << (wrong ? " stroke=\"black\"" : "") << "/>\n";
  }
  const double ty = top + bar_area - bar_area * std::clamp(threshold / max_u, 0.0, 1.0);
  svg << "<line x1=\"" << left << "\" x2=\"" << left + step * t << "\" y1=\"" << ty << "\" y2=\"" << ty
      << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hypnos::eval
