/*
 * Plain-text key=value run configuration. Parsing is strict: unknown keys,
 * duplicate keys, and malformed numbers are errors; '#' starts a comment.
 * Every field has a documented default so an empty config is valid.
 */

#pragma once

#include "tpfem/params.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpfem {

struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Keys (defaults in parentheses):
//   n (4), T_f (0.5), dt (0.0625), tol (1e-10), max_iters (50)
//   case (mms) - source/IC selection: "mms" or "zero"
//   output_dir (.), seed (12345)
//   levels (4,8,16,32), dt_over_h (0.25) - refinement-study controls
//   s_values (-2) - pencil shifts to probe
//   a0 (1), b0 (0.05), c0 (1), alpha (0.1), beta (0.1), mu (1), lambda (1)
//   K11 (1), K12 (0), K22 (1), Theta11 (1), Theta12 (0), Theta22 (1)
struct RunConfig
{
    int n = 4;
    double T_f = 0.5;
    double dt = 0.0625;
    double tol = 1e-10;
    int max_iters = 50;
    std::string case_name = "mms";
    std::string output_dir = ".";
    unsigned seed = 12345;
    std::vector<int> levels = {4, 8, 16, 32};
    double dt_over_h = 0.25;
    std::vector<double> s_values = {-2.0};
    MaterialParams params;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// Every key on its own line as "<prefix><key>=<value>"; the resolved-config
// header written at the top of all output files.
void write_config(const RunConfig& cfg, std::ostream& os,
                  const std::string& prefix = "# ");

} // namespace tpfem
