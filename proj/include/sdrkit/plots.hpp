#pragma once

#include <string>

#include "sdrkit/report.hpp"

namespace sdrkit {

/// Heatmap of d_tilde with one row per (model, format) and one column per
/// trait. Undefined cells are drawn hatched grey. Throws Error("empty_report").
std::string heatmap_svg(const SdrReport& r);

/// Aggregate d_tilde (x) against mean honest recovery r (y) with the SDR
/// bands at 0.2 / 0.5 and recovery lines at 0.50 / 0.70. Formats of the same
/// model are joined by a grey line. Throws Error("empty_report") when no
/// entry has both coordinates defined.
std::string tradeoff_svg(const SdrReport& r);

}  // namespace sdrkit
