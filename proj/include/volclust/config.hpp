#pragma once

/**
 * @file config.hpp
 * @brief Model spec files.
 *
 * INI-style text with three sections:
 *
 *     [model]
 *     b = constant:1
 *     sigma1 = atan:0.3,0.5
 *     sigma2 = table:sigma2.csv     ; two columns y,value
 *     m = 0
 *     rho = -0.2
 *     epsilon = 0.004
 *
 *     [driver]
 *     eta = 0.25
 *     gamma = 1
 *
 *     [option]
 *     strike = 100
 *     maturity = 0.25
 *
 * Table paths are resolved relative to the config file's directory.
 */

#include "volclust/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace volclust {

/// Parses `constant:<v>`, `atan:<base>,<amp>` or `table:<path>`.
CoefficientFunction parse_coefficient(const std::string& text,
                                      const std::filesystem::path& base_dir = {});

ModelSpec parse_model_config(std::istream& is, const std::filesystem::path& base_dir = {});
ModelSpec load_model_config(const std::filesystem::path& path);

/// Writes the spec in the same format. Tabulated coefficients are written
/// as their source path, so they round-trip only when read from a file.
void write_model_config(std::ostream& os, const ModelSpec& spec);

} // namespace volclust
