#include "laserguide/operate/report.hpp"

#include <algorithm>
#include <cstdio>

#include "laserguide/error.hpp"

namespace laserguide::operate {

bool ReportRow::operator==(const ReportRow& o) const {
  return id == o.id && nominal_point == o.nominal_point && nominal_direction == o.nominal_direction &&
         projected == o.projected && achieved_point == o.achieved_point &&
         achieved_direction == o.achieved_direction && pos_err == o.pos_err && ang_err == o.ang_err &&
         pass == o.pass;
}

ReportSummary summarize(const std::vector<ReportRow>& rows, double total_time_s) {
  ReportSummary s;
  s.rows = static_cast<int>(rows.size());
  s.total_time_s = total_time_s;
  int n = 0;
  for (const auto& r : rows) {
    if (r.pass) ++s.pass_count;
    if (!r.projected) continue;
    ++n;
    s.mean_pos_err += r.pos_err;
    s.mean_ang_err += r.ang_err;
    s.max_pos_err = std::max(s.max_pos_err, r.pos_err);
    s.max_ang_err = std::max(s.max_ang_err, r.ang_err);
  }
  if (n > 0) {
    s.mean_pos_err /= n;
    s.mean_ang_err /= n;
    // Rounding in the division can push the mean past an all-equal max.
    s.mean_pos_err = std::min(s.mean_pos_err, s.max_pos_err);
    s.mean_ang_err = std::min(s.mean_ang_err, s.max_ang_err);
  }
  return s;
}

io::json to_json(const RunReport& r) {
  io::json rows = io::json::array();
  for (const auto& row : r.rows) {
    io::json j{{"id", row.id},
               {"nominal", {{"point", io::vec3_to_json(row.nominal_point)},
                            {"direction", io::vec3_to_json(row.nominal_direction)}}},
               {"projected", row.projected}};
    if (row.projected) {
      j["achieved"] = {{"point", io::vec3_to_json(row.achieved_point)},
                       {"direction", io::vec3_to_json(row.achieved_direction)}};
    }
    j["pos_err"] = row.pos_err;
    j["ang_err"] = row.ang_err;
    j["pass"] = row.pass;
    rows.push_back(std::move(j));
  }
  const auto& s = r.summary;
  io::json out{{"version", 1},
               {"complete", r.complete},
               {"rows", rows},
               {"summary",
                {{"rows", s.rows},
                 {"mean_pos_err", s.mean_pos_err},
                 {"max_pos_err", s.max_pos_err},
                 {"mean_ang_err", s.mean_ang_err},
                 {"max_ang_err", s.max_ang_err},
                 {"pass_count", s.pass_count},
                 {"total_time_s", s.total_time_s}}}};
  if (!r.complete) out["abort_reason"] = r.abort_reason;
  return out;
}

namespace {

RunReport report_from_json_unchecked(const io::json& j) {
  if (io::get<int>(j, "version", "report") != 1) throw Error(Errc::ValidationError, "unsupported report version");
  RunReport r;
  r.complete = io::get<bool>(j, "complete", "report");
  r.abort_reason = io::get_or<std::string>(j, "abort_reason", "", "report");
  for (const auto& row : j.at("rows")) {
    ReportRow x;
    x.id = io::get<std::string>(row, "id", "report");
    x.nominal_point = io::vec3_from_json(row.at("nominal").at("point"), "report row");
    x.nominal_direction = io::vec3_from_json(row.at("nominal").at("direction"), "report row");
    x.projected = io::get<bool>(row, "projected", "report");
    if (x.projected) {
      x.achieved_point = io::vec3_from_json(row.at("achieved").at("point"), "report row");
      x.achieved_direction = io::vec3_from_json(row.at("achieved").at("direction"), "report row");
    }
    x.pos_err = io::get<double>(row, "pos_err", "report");
    x.ang_err = io::get<double>(row, "ang_err", "report");
    x.pass = io::get<bool>(row, "pass", "report");
    r.rows.push_back(std::move(x));
  }
  const auto& s = j.at("summary");
  r.summary.rows = io::get<int>(s, "rows", "report");
  r.summary.mean_pos_err = io::get<double>(s, "mean_pos_err", "report");
  r.summary.max_pos_err = io::get<double>(s, "max_pos_err", "report");
  r.summary.mean_ang_err = io::get<double>(s, "mean_ang_err", "report");
  r.summary.max_ang_err = io::get<double>(s, "max_ang_err", "report");
  r.summary.pass_count = io::get<int>(s, "pass_count", "report");
  r.summary.total_time_s = io::get<double>(s, "total_time_s", "report");
  if (r.summary.rows != static_cast<int>(r.rows.size())) {
    throw Error(Errc::ValidationError, "summary row count does not match rows");
  }
  if (!(summarize(r.rows, r.summary.total_time_s) == r.summary)) {
    throw Error(Errc::ValidationError, "summary does not match rows");
  }
  return r;
}

}  // namespace

RunReport report_from_json(const io::json& j) {
  try {
    return report_from_json_unchecked(j);
  } catch (const io::json::exception& e) {
    throw Error(Errc::ValidationError, std::string("report: ") + e.what());
  }
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w, bool right) {
  if (s.size() >= w) return s;
  return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

std::string render_table(const RunReport& r) {
  const std::vector<std::string> head = {"id", "nom_x", "nom_y", "nom_z", "ach_x", "ach_y",
                                         "ach_z", "pos_err_mm", "ang_err_deg", "pass"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(head);
  for (const auto& row : r.rows) {
    std::vector<std::string> c{row.id};
    for (int k = 0; k < 3; ++k) c.push_back(fmt("%.4f", row.nominal_point[k]));
    for (int k = 0; k < 3; ++k) c.push_back(row.projected ? fmt("%.4f", row.achieved_point[k]) : "-");
    c.push_back(row.projected ? fmt("%.3f", row.pos_err * 1e3) : "-");
    c.push_back(row.projected ? fmt("%.4f", geom::rad2deg(row.ang_err)) : "-");
    c.push_back(row.pass ? "yes" : "no");
    cells.push_back(std::move(c));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& c : cells)
    for (std::size_t k = 0; k < c.size(); ++k) width[k] = std::max(width[k], c[k].size());

  std::string out;
  for (const auto& c : cells) {
    std::string line;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) line += "  ";
      line += pad(c[k], width[k], k != 0 && k + 1 != c.size());
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  const auto& s = r.summary;
  out += "\n";
  out += "rows          " + std::to_string(s.rows) + "\n";
  out += "pass          " + std::to_string(s.pass_count) + "/" + std::to_string(s.rows) + "\n";
  out += "pos_err_mm    mean " + fmt("%.3f", s.mean_pos_err * 1e3) + "  max " +
         fmt("%.3f", s.max_pos_err * 1e3) + "\n";
  out += "ang_err_deg   mean " + fmt("%.4f", geom::rad2deg(s.mean_ang_err)) + "  max " +
         fmt("%.4f", geom::rad2deg(s.max_ang_err)) + "\n";
  out += "total_time_s  " + fmt("%.1f", s.total_time_s) + "\n";
  if (!r.complete) out += "INCOMPLETE    " + r.abort_reason + "\n";
  return out;
}

}  // namespace

std::string write_report(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::Table) return render_table(r);
  return to_json(r).dump(2) + "\n";
}

RunReport parse_report(const std::string& text) { return report_from_json(io::parse_json(text, "report")); }

}  // namespace laserguide::operate
