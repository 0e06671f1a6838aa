#pragma once

#include <ostream>
#include <string>

#include "engine.hpp"

namespace ionlag::app {

/// CSV: '#' lines echo the effective configuration, then an RFC-4180 table
/// with doubles in %.17g. JSONL: one config object, then one object per row.
void write_table(std::ostream& os, const Table& t, Format f, const std::string& command, const Settings& effective);

std::string csv_field(const std::string& s);

}  // namespace ionlag::app
