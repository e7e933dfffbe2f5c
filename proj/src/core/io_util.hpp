#pragma once

#include <functional>
#include <ostream>
#include <string>

namespace dmdhsi {

// Writes through a temporary file in the same directory and renames it over
// the destination, so readers never observe a half-written file.
void atomic_write_file(const std::string& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_entire_file(const std::string& path);

}  // namespace dmdhsi
