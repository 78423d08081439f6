#pragma once

#include <string>
#include <vector>

#include "laserguide/geom.hpp"
#include "laserguide/io.hpp"

namespace laserguide::operate {

using geom::Vec3;

struct ReportRow {
  std::string id;
  Vec3 nominal_point = Vec3::Zero();
  Vec3 nominal_direction = Vec3::UnitX();
  bool projected = false;  // false when the beam missed or the task never ran
  Vec3 achieved_point = Vec3::Zero();
  Vec3 achieved_direction = Vec3::UnitX();
  double pos_err = 0.0;  // m
  double ang_err = 0.0;  // rad
  bool pass = false;

  bool operator==(const ReportRow& o) const;
};

struct ReportSummary {
  int rows = 0;
  double mean_pos_err = 0.0;
  double max_pos_err = 0.0;
  double mean_ang_err = 0.0;
  double max_ang_err = 0.0;
  int pass_count = 0;
  double total_time_s = 0.0;

  bool operator==(const ReportSummary&) const = default;
};

struct RunReport {
  std::vector<ReportRow> rows;
  ReportSummary summary;
  bool complete = true;
  std::string abort_reason;  // set when complete is false

  bool operator==(const RunReport&) const = default;
};

/// Statistics over projected rows; total_time_s is passed through.
ReportSummary summarize(const std::vector<ReportRow>& rows, double total_time_s);

enum class ReportFormat { Table, Structured };

std::string write_report(const RunReport& r, ReportFormat format);
/// Structured format only. Throws ParseError / ValidationError.
RunReport parse_report(const std::string& text);

io::json to_json(const RunReport& r);
RunReport report_from_json(const io::json& j);

}  // namespace laserguide::operate
