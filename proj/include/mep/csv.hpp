#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mep {

/// Shortest decimal text that reads back to the same double (at most 17
/// significant digits).
std::string format_double(double x);

/// Joins values with commas using format_double.
std::string join_doubles(const std::vector<double>& xs);

/// Parses "1,2.5,3". Throws InputError naming `what` on malformed cells.
std::vector<double> parse_doubles(std::string_view text, std::string_view what);

/// Inclusive grid lo:hi:steps with `steps` points (steps == 1 gives {lo}).
struct Grid {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 1;

    std::vector<double> points() const;
};

Grid parse_grid(std::string_view text);

}  // namespace mep
