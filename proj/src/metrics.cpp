#include "gridrl/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gridrl {

namespace {

std::string format_float(float v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open metrics file: " + path.string());
  out_ << kHeader << "\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << row.step << ',';
  if (row.mean_return_100) out_ << format_float(*row.mean_return_100);
  out_ << ',' << row.episodes << ',' << row.counts.target << ','
       << row.counts.lava << ',' << row.counts.timeout << ',';
  if (row.buffer_reward) out_ << format_float(*row.buffer_reward);
  out_ << ',';
  if (row.buffer_momentum) out_ << *row.buffer_momentum;
  out_ << ',';
  if (row.disc_loss) out_ << format_float(*row.disc_loss);
  out_ << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("metrics write failed");
}

}  // namespace gridrl
