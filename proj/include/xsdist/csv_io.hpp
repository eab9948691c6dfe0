#pragma once

#include <iosfwd>
#include <string>

#include "xsdist/point_cloud.hpp"

namespace xsdist {

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format17(double v);

/// Cloud CSV format: one point per line, coordinates comma-separated,
/// optional first line `# dim=N`. Ragged rows are rejected. Comment lines
/// (leading '#') and blank lines are skipped.
PointCloud read_cloud_csv(std::istream& in, const std::string& origin = "<stream>");
PointCloud read_cloud_csv_file(const std::string& path);

void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
void write_cloud_csv_file(const std::string& path, const PointCloud& cloud);

}  // namespace xsdist
