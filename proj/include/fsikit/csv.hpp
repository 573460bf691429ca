#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace fsikit {

// Deterministic float formatting for all CSV output: 9 significant digits,
// shortest form ("%.9g").  Identical inputs produce byte-identical files.
std::string format_number(double v);

// Write a file atomically: the writer streams into "<path>.tmp" which is
// renamed over the target only after a successful write.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer);

} // namespace fsikit
