#pragma once

#include <filesystem>
#include <vector>

namespace qha::cli {

// Turns the CSV results in dir into gnuplot-ready .dat files (whitespace
// separated, leading "# column ..." comment) plus .plt command files.
// Nothing is rendered. Returns the paths written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir);

}  // namespace qha::cli
