#pragma once

#include <filesystem>
#include <vector>

#include "lowsnr/spectra.hpp"

namespace lowsnr {

/// Reads a `lambda,value` table (header row required) into density samples.
/// Grid checks happen in FadingModel::tabulated_density.
params::TabulatedDensity read_density_table(const std::filesystem::path& path);

void write_density_table(const std::filesystem::path& path, const std::vector<double>& grid,
                         const std::vector<double>& values);

FadingModel load_density_model(const std::filesystem::path& path, const ModelOptions& opts = {});

}  // namespace lowsnr
