#include "flexarm/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace flexarm {
namespace {

using nlohmann::json;

const char* const kXYA[] = {"x", "y", "alpha"};
const char* const kXY[] = {"x", "y"};

void AppendNumber(std::string* line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line->push_back(',');
  line->append(buf);
}

std::string FormatRecord(const LogRecord& r, bool include_timing) {
  std::string line;
  line.reserve(1024);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", r.t);
  line.append(buf);
  line.append(",").append(std::to_string(r.phase));
  for (Eigen::Index i = 0; i < r.gamma.size(); ++i) AppendNumber(&line, r.gamma[i]);
  for (Eigen::Index i = 0; i < r.delta.size(); ++i) AppendNumber(&line, r.delta[i]);
  AppendNumber(&line, r.p.x());
  AppendNumber(&line, r.p.y());
  AppendNumber(&line, r.alpha);
  for (int i = 0; i < 3; ++i) AppendNumber(&line, r.q_r[i]);
  for (int i = 0; i < 2; ++i) AppendNumber(&line, r.f_r[i]);
  for (int i = 0; i < 2; ++i) AppendNumber(&line, r.f_true[i]);
  for (int i = 0; i < 2; ++i) AppendNumber(&line, r.f_meas[i]);
  for (int i = 0; i < 2; ++i) AppendNumber(&line, r.eta[i]);
  for (int i = 0; i < 3; ++i) AppendNumber(&line, r.e[i]);
  for (int i = 0; i < 3; ++i) AppendNumber(&line, r.xi[i]);
  AppendNumber(&line, r.ke_hat_normal);
  AppendNumber(&line, r.ke_hat_tangential);
  for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) {
    AppendNumber(&line, r.theta_hat[i]);
  }
  AppendNumber(&line, r.V);
  AppendNumber(&line, r.Vdot_bound);
  AppendNumber(&line, r.projection_correction);
  line.append(r.contact ? ",1" : ",0");
  if (include_timing) AppendNumber(&line, r.step_us);
  return line;
}

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ToDouble(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ExportError("line " + std::to_string(line_no) + ": bad number \"" + s + "\"");
  }
}

// ---------------------------------------------------------------- SVG ----

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string y_label;
  std::vector<Series> series;
};

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
                                "#7f7f7f"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string RenderSvg(const std::string& title, const std::vector<Panel>& panels) {
  const double width = 900, panel_h = 260, top = 40, left = 80, right = 170;
  const double plot_w = width - left - right;
  const double height = top + panels.size() * (panel_h + 30) + 20;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << title << "</text>\n";

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& panel = panels[k];
    const double y0 = top + k * (panel_h + 30);
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : panel.series) {
      for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
      for (double v : s.y) {
        if (std::isfinite(v)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
      }
    }
    if (xmin > xmax) xmin = 0, xmax = 1;
    if (ymin > ymax) ymin = 0, ymax = 1;
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    const double pad = std::max(1e-12, 0.05 * (ymax - ymin));
    if (ymax - ymin < 1e-12) {
      ymin -= std::max(1e-6, std::abs(ymin) * 0.05);
      ymax += std::max(1e-6, std::abs(ymax) * 0.05);
    } else {
      ymin -= pad;
      ymax += pad;
    }
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double v) { return y0 + panel_h - (v - ymin) / (ymax - ymin) * panel_h; };

    svg << "<g>\n<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << plot_w
        << "\" height=\"" << panel_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"" << y0 - 6 << "\">" << panel.title
        << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
      const double yv = ymin + (ymax - ymin) * i / 4.0;
      const double xv = xmin + (xmax - xmin) * i / 4.0;
      svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << sy(yv)
          << "\" y2=\"" << sy(yv) << "\" stroke=\"#ddd\"/>\n"
          << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4
          << "\" text-anchor=\"end\">" << Num(yv) << "</text>\n"
          << "<text x=\"" << sx(xv) << "\" y=\"" << y0 + panel_h + 14
          << "\" text-anchor=\"middle\">" << Num(xv) << "</text>\n";
    }
    svg << "<text transform=\"translate(18," << y0 + panel_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << panel.y_label << "</text>\n";
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const Series& series = panel.series[s];
      svg << "<polyline fill=\"none\" stroke-width=\"1.4\" stroke=\"" << series.color
          << "\"" << (series.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < series.x.size(); ++i) {
        if (!std::isfinite(series.y[i])) continue;
        svg << Num(sx(series.x[i])) << ',' << Num(sy(series.y[i])) << ' ';
      }
      svg << "\"/>\n";
      const double ly = y0 + 14 + 16 * s;
      svg << "<line x1=\"" << left + plot_w + 10 << "\" x2=\"" << left + plot_w + 34
          << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << series.color
          << "\"" << (series.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
          << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly << "\">"
          << series.label << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 4
      << "\" text-anchor=\"middle\">t [s]</text>\n</svg>\n";
  return svg.str();
}

Series Extract(const RunLog& log, const std::string& label,
               const std::function<double(const LogRecord&)>& f,
               const std::string& color, bool dashed = false) {
  Series s{label, {}, {}, color, dashed};
  s.x.reserve(log.records.size());
  s.y.reserve(log.records.size());
  for (const LogRecord& r : log.records) {
    s.x.push_back(r.t);
    s.y.push_back(f(r));
  }
  return s;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw ExportError(path.string() + ": write failed");
}

}  // namespace

std::vector<std::string> CsvHeader(int N, int M) {
  std::vector<std::string> h = {"t", "phase"};
  for (int i = 1; i <= N; ++i) h.push_back("gamma_" + std::to_string(i));
  for (int i = 1; i <= M; ++i) h.push_back("delta_" + std::to_string(i));
  h.insert(h.end(), {"p_x", "p_y", "alpha"});
  for (const char* c : kXYA) h.push_back(std::string("qr_") + c);
  for (const char* c : kXY) h.push_back(std::string("fr_") + c);
  for (const char* c : kXY) h.push_back(std::string("f_true_") + c);
  for (const char* c : kXY) h.push_back(std::string("f_meas_") + c);
  for (const char* c : kXY) h.push_back(std::string("eta_") + c);
  for (const char* c : kXYA) h.push_back(std::string("e_") + c);
  for (const char* c : kXYA) h.push_back(std::string("xi_") + c);
  h.insert(h.end(), {"ke_hat_n", "ke_hat_t"});
  for (int r = 1; r <= 3 * M; ++r) {
    for (int c = 1; c <= M; ++c) {
      h.push_back("theta_" + std::to_string(r) + "_" + std::to_string(c));
    }
  }
  h.insert(h.end(), {"V", "Vdot_bound", "proj_corr", "contact", "step_us"});
  return h;
}

void WriteCsv(const RunLog& log, std::ostream& out, bool include_timing) {
  std::vector<std::string> header = CsvHeader(log.num_actuated, log.num_flexible);
  if (!include_timing) header.pop_back();
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const LogRecord& r : log.records) out << FormatRecord(r, include_timing) << '\n';
}

void WriteCsv(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError(path.string() + ": cannot open for writing");
  WriteCsv(log, out);
  if (!out) throw ExportError(path.string() + ": write failed");
}

RunLog ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ExportError("empty log file");
  const std::vector<std::string> header = Split(line);
  int N = 0, M = 0;
  for (const std::string& h : header) {
    N += h.rfind("gamma_", 0) == 0;
    M += h.rfind("delta_", 0) == 0;
  }
  std::vector<std::string> expected = CsvHeader(N, M);
  const bool timing = header.size() == expected.size();
  if (!timing) expected.pop_back();
  if (header != expected) throw ExportError("line 1: unexpected column layout");

  RunLog log;
  log.num_actuated = N;
  log.num_flexible = M;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = Split(line);
    if (f.size() != header.size()) {
      throw ExportError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(f.size()));
    }
    std::size_t k = 0;
    auto next = [&] { return ToDouble(f[k++], line_no); };
    LogRecord r;
    r.t = next();
    r.phase = static_cast<int>(next());
    r.gamma.resize(N);
    for (int i = 0; i < N; ++i) r.gamma[i] = next();
    r.delta.resize(M);
    for (int i = 0; i < M; ++i) r.delta[i] = next();
    r.p.x() = next();
    r.p.y() = next();
    r.alpha = next();
    for (int i = 0; i < 3; ++i) r.q_r[i] = next();
    for (int i = 0; i < 2; ++i) r.f_r[i] = next();
    for (int i = 0; i < 2; ++i) r.f_true[i] = next();
    for (int i = 0; i < 2; ++i) r.f_meas[i] = next();
    for (int i = 0; i < 2; ++i) r.eta[i] = next();
    for (int i = 0; i < 3; ++i) r.e[i] = next();
    for (int i = 0; i < 3; ++i) r.xi[i] = next();
    r.ke_hat_normal = next();
    r.ke_hat_tangential = next();
    r.theta_hat.resize(3 * M * M);
    for (int i = 0; i < 3 * M * M; ++i) r.theta_hat[i] = next();
    r.V = next();
    r.Vdot_bound = next();
    r.projection_correction = next();
    r.contact = next() != 0.0;
    if (timing) r.step_us = next();
    if (!log.records.empty() && !(r.t > log.records.back().t)) {
      throw ExportError("line " + std::to_string(line_no) + ": time is not increasing");
    }
    log.records.push_back(std::move(r));
  }
  if (log.records.size() >= 2) {
    log.control_dt = log.records[1].t - log.records[0].t;
  }
  return log;
}

RunLog ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExportError(path.string() + ": cannot open");
  return ReadCsv(in);
}

std::uint64_t LogHash(const RunLog& log) {
  std::ostringstream out;
  WriteCsv(log, out, false);
  return std::hash<std::string>{}(out.str());
}

StepTimeStats ComputeStepTimes(const RunLog& log) {
  std::vector<double> us;
  us.reserve(log.records.size());
  for (const LogRecord& r : log.records) us.push_back(r.step_us);
  StepTimeStats s;
  if (us.empty()) return s;
  std::sort(us.begin(), us.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * us.size()));
    return us[std::clamp<std::size_t>(idx, 1, us.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p90 = rank(0.90);
  s.p99 = rank(0.99);
  s.max = us.back();
  return s;
}

double SettlingTime(const RunLog& log, std::size_t begin, std::size_t end,
                    double threshold, bool force_metric) {
  end = std::min(end, log.records.size());
  double settled = -1.0;
  for (std::size_t i = begin; i < end; ++i) {
    const LogRecord& r = log.records[i];
    const double metric = force_metric ? r.eta.norm() : r.e.head<2>().norm();
    if (metric >= threshold) {
      settled = -1.0;
    } else if (settled < 0.0) {
      settled = r.t;
    }
  }
  return settled;
}

json Summarize(const RunLog& log, const std::vector<std::string>& phase_names,
               const RunResult* result) {
  if (log.records.empty()) throw ExportError("empty log");
  json s;
  const LogRecord& last = log.records.back();
  s["steps"] = log.records.size();
  s["duration"] = last.t;

  json phases = json::array();
  std::size_t begin = 0;
  while (begin < log.records.size()) {
    const int id = log.records[begin].phase;
    std::size_t end = begin;
    while (end < log.records.size() && log.records[end].phase == id) ++end;
    const bool force = log.records[begin].f_r.norm() > 0.0;
    json p;
    p["index"] = id;
    p["name"] = id < static_cast<int>(phase_names.size()) ? phase_names[id] : "";
    p["start"] = log.records[begin].t;
    p["end"] = log.records[end - 1].t;
    p["metric"] = force ? "force_error" : "position_error";
    p["threshold"] = force ? 0.05 : 1e-3;
    const double settled = SettlingTime(log, begin, end, force ? 0.05 : 1e-3, force);
    p["converged_at"] = settled < 0.0 ? json(nullptr) : json(settled);
    p["final_position_error"] = log.records[end - 1].e.head<2>().norm();
    p["final_force_error"] = log.records[end - 1].eta.norm();
    phases.push_back(p);
    begin = end;
  }
  s["phases"] = phases;

  double max_increase = 0.0;
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    if (log.records[i].phase != log.records[i - 1].phase) continue;
    max_increase = std::max(max_increase, log.records[i].V - log.records[i - 1].V);
  }
  s["V"] = {{"initial", log.records.front().V},
            {"final", last.V},
            {"max_increase", max_increase}};
  s["final"] = {{"position_error", last.e.head<2>().norm()},
                {"true_position_error", (last.q_r.head<2>() - last.p).norm()},
                {"force_error", last.eta.norm()},
                {"ke_hat_n", last.ke_hat_normal},
                {"ke_hat_t", last.ke_hat_tangential}};
  const StepTimeStats st = ComputeStepTimes(log);
  s["step_time_us"] = {{"p50", st.p50}, {"p90", st.p90}, {"p99", st.p99}, {"max", st.max}};
  if (result) {
    s["completed"] = result->completed;
    s["abort_reason"] = result->abort_reason;
    s["violations"] = result->violations;
    s["monitors"] = {{"max_V_increase", result->max_V_increase},
                     {"V_monitor_active", result->V_monitor_active},
                     {"max_static_residual", result->max_static_residual},
                     {"max_det_error", result->max_det_error},
                     {"max_projection_correction", result->max_projection_correction},
                     {"max_theta_ratio", result->max_theta_ratio}};
  }
  return s;
}

std::vector<std::filesystem::path> WritePlots(const RunLog& log,
                                              const std::filesystem::path& dir) {
  if (log.records.empty()) throw ExportError("empty log");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ExportError(dir.string() + ": " + ec.message());

  const Panel force{"Contact force", "f [N]",
                    {Extract(log, "f_x", [](auto& r) { return r.f_meas.x(); }, kPalette[0]),
                     Extract(log, "f_y", [](auto& r) { return r.f_meas.y(); }, kPalette[1]),
                     Extract(log, "f_r,x", [](auto& r) { return r.f_r.x(); }, kPalette[0], true),
                     Extract(log, "f_r,y", [](auto& r) { return r.f_r.y(); }, kPalette[1], true)}};
  const Panel stiffness{
      "Adaptive contact parameters", "k_e estimate",
      {Extract(log, "k_n", [](auto& r) { return r.ke_hat_normal; }, kPalette[2]),
       Extract(log, "k_t", [](auto& r) { return r.ke_hat_tangential; }, kPalette[3])}};

  const Panel position{
      "End-effector position", "p [m]",
      {Extract(log, "p_x", [](auto& r) { return r.p.x(); }, kPalette[0]),
       Extract(log, "p_y", [](auto& r) { return r.p.y(); }, kPalette[1]),
       Extract(log, "p_r,x", [](auto& r) { return r.q_r.x(); }, kPalette[0], true),
       Extract(log, "p_r,y", [](auto& r) { return r.q_r.y(); }, kPalette[1], true)}};
  const Panel orientation{
      "End-effector orientation", "alpha [rad]",
      {Extract(log, "alpha", [](auto& r) { return r.alpha; }, kPalette[2]),
       Extract(log, "alpha_r", [](auto& r) { return r.q_r.z(); }, kPalette[2], true)}};

  const int M = log.num_flexible;
  const char* const block_names[] = {"normal", "tangential", "gravity"};
  std::vector<Panel> theta_panels;
  for (int b = 0; b < 3; ++b) {
    Panel p{std::string("Theta estimate, ") + block_names[b] + " rows", "", {}};
    for (int i = 0; i < M; ++i) {
      // Diagonal entries carry the structure; off-diagonals stay small.
      const int idx = (b * M + i) * M + i;
      p.series.push_back(Extract(
          log, "theta_" + std::to_string(b * M + i + 1) + "_" + std::to_string(i + 1),
          [idx](auto& r) { return r.theta_hat[idx]; }, kPalette[i % 9]));
    }
    theta_panels.push_back(std::move(p));
  }

  std::vector<std::filesystem::path> paths = {dir / "force.svg", dir / "pose.svg",
                                              dir / "theta.svg"};
  WriteText(paths[0], RenderSvg("Force regulation", {force, stiffness}));
  WriteText(paths[1], RenderSvg("Cartesian pose", {position, orientation}));
  WriteText(paths[2], RenderSvg("Flexibility parameters", theta_panels));
  return paths;
}

}  // namespace flexarm
