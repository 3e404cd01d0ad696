#include "nasolve/harness.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace nasolve {

namespace {

std::string opt_csv(const std::optional<double> &v)
{
  return v ? format_double(*v) : std::string();
}

std::string json_number(double v)
{
  return std::isfinite(v) ? format_double(v) : std::string("null");
}

std::string opt_json(const std::optional<double> &v)
{
  return v ? json_number(*v) : std::string("null");
}

std::string json_string(std::string_view s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void emit_csv(std::ostringstream &os, const ConvergenceReport &report)
{
  for (std::size_t i = 0; i < std::size(kHistoryColumns); ++i)
    os << (i ? "," : "") << kHistoryColumns[i];
  os << '\n';
  for (const auto &rec : report.records) {
    std::string gamma;
    for (std::size_t j = 0; j < rec.gamma.size(); ++j)
      gamma += (j ? ";" : "") + format_double(rec.gamma[j]);
    os << rec.k << ',' << format_double(rec.residual_norm) << ','
       << format_double(rec.step_norm) << ',' << gamma << ',' << opt_csv(rec.lambda) << ','
       << opt_csv(rec.eta) << ',' << opt_csv(rec.r_used) << ',' << opt_csv(rec.beta) << ','
       << opt_csv(rec.theta) << ',' << opt_csv(rec.theta_lambda) << ','
       << (rec.decision ? to_string(rec.decision->kind) : std::string_view()) << ','
       << opt_csv(rec.q) << '\n';
  }
}

void emit_json(std::ostringstream &os, const ConvergenceReport &report)
{
  os << "{\"status\":" << json_string(to_string(report.status))
     << ",\"iterations\":" << report.iterations << ",\"q_term\":" << opt_json(report.q_term)
     << ",\"final_residual_norm\":" << json_number(report.final_residual_norm)
     << ",\"r_history\":[";
  for (std::size_t i = 0; i < report.r_history.size(); ++i)
    os << (i ? "," : "") << json_number(report.r_history[i]);
  os << "],\"records\":[";
  for (std::size_t r = 0; r < report.records.size(); ++r) {
    const auto &rec = report.records[r];
    os << (r ? "," : "") << "{\"k\":" << rec.k
       << ",\"residual_norm\":" << json_number(rec.residual_norm)
       << ",\"step_norm\":" << json_number(rec.step_norm) << ",\"gamma\":";
    if (rec.gamma.empty()) {
      os << "null";
    } else {
      os << '[';
      for (std::size_t j = 0; j < rec.gamma.size(); ++j)
        os << (j ? "," : "") << json_number(rec.gamma[j]);
      os << ']';
    }
    os << ",\"lambda\":" << opt_json(rec.lambda) << ",\"eta\":" << opt_json(rec.eta)
       << ",\"r_used\":" << opt_json(rec.r_used) << ",\"beta\":" << opt_json(rec.beta)
       << ",\"theta\":" << opt_json(rec.theta) << ",\"theta_lambda\":" << opt_json(rec.theta_lambda)
       << ",\"decision\":"
       << (rec.decision ? json_string(to_string(rec.decision->kind)) : std::string("null"))
       << ",\"q\":" << opt_json(rec.q) << '}';
  }
  os << "]}";
}

} // namespace

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

OutputFormat parse_format(std::string_view s)
{
  if (s == "csv")
    return OutputFormat::csv;
  if (s == "json")
    return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + std::string(s) + "'");
}

std::string emit_history(const ConvergenceReport &report, OutputFormat format)
{
  std::ostringstream os;
  if (format == OutputFormat::csv)
    emit_csv(os, report);
  else
    emit_json(os, report);
  return os.str();
}

} // namespace nasolve
