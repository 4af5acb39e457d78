#include "plot.hpp"

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "qha/errors.hpp"

#include "csv.hpp"

namespace qha::cli {

namespace {

void write_dat(const std::filesystem::path& path, const CsvTable& table,
               const std::vector<std::string>& wanted) {
  std::vector<std::size_t> idx;
  for (const auto& name : wanted) idx.push_back(table.column(name));

  std::ofstream out(path, std::ios::binary);
  out << "#";
  for (const auto& name : wanted) out << ' ' << name;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) out << ' ';
      out << format_double(table.data[idx[k]][r]);
    }
    out << '\n';
  }
}

void write_plt(const std::filesystem::path& path, const std::string& dat_name,
               const std::string& title, const std::vector<std::string>& series) {
  std::ofstream out(path, std::ios::binary);
  out << "set title '" << title << "'\n";
  out << "set xlabel '" << series.front() << "'\n";
  out << "set key outside\n";
  out << "plot";
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (k > 1) out << ',';
    out << " '" << dat_name << "' using 1:" << k + 1 << " with lines title '" << series[k]
        << "'";
  }
  out << '\n';
}

// pivot long-format (t, q, value) into a matrix block per t
void write_matrix_dat(const std::filesystem::path& path, const CsvTable& table,
                      const std::string& t_col, const std::string& q_col,
                      const std::string& v_col) {
  const auto ti = table.column(t_col);
  const auto qi = table.column(q_col);
  const auto vi = table.column(v_col);
  std::ofstream out(path, std::ios::binary);
  out << "# " << t_col << ' ' << q_col << ' ' << v_col << " (blocks per " << t_col << ")\n";
  double current_t = 0;
  bool first = true;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const double t = table.data[ti][r];
    if (first || t != current_t) {
      if (!first) out << '\n';  // gnuplot block separator
      current_t = t;
      first = false;
    }
    out << format_double(t) << ' ' << format_double(table.data[qi][r]) << ' '
        << format_double(table.data[vi][r]) << '\n';
  }
}

}  // namespace

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto emit_series = [&](const std::string& csv, const std::string& stem,
                         std::vector<std::string> series, const std::string& title) {
    if (!std::filesystem::exists(dir / csv)) return;
    const auto table = read_csv(dir / csv);
    write_dat(dir / (stem + ".dat"), table, series);
    write_plt(dir / (stem + ".plt"), stem + ".dat", title, series);
    written.push_back(dir / (stem + ".dat"));
    written.push_back(dir / (stem + ".plt"));
  };

  emit_series("observables.csv", "observables", {"t", "mean_q", "mean_p", "energy", "norm"},
              "observables");
  emit_series("summary.csv", "summary", {"t", "residual", "method_gap"},
              "trajectory diagnostics");
  emit_series("moments.csv", "moments", {"t", "mean_q", "mean_p", "var_q", "var_p"},
              "ensemble moments");
  emit_series("variance.csv", "variance", {"t", "var_p", "expected_var_p"},
              "momentum marginal variance");
  emit_series("marginals.csv", "marginals", {"q", "grid_marginal", "ensemble_marginal"},
              "position marginals");
  emit_series("density_compare.csv", "density_compare",
              {"q", "lagrangian_density", "schrodinger_density"}, "density comparison");
  emit_series("final_density.csv", "final_density", {"q", "density"}, "final density");
  emit_series("spread_vs_theta.csv", "spread_vs_theta", {"theta", "spread"},
              "momentum spread vs noise amplitude");

  // paired quantum/classical overlay for friction runs
  if (std::filesystem::exists(dir / "observables.csv")) {
    const auto table = read_csv(dir / "observables.csv");
    bool has_classical = false;
    for (const auto& col : table.columns) has_classical |= (col == "q_classical");
    if (has_classical) {
      write_dat(dir / "kostin_overlay.dat", table, {"t", "mean_q", "q_classical"});
      write_plt(dir / "kostin_overlay.plt", "kostin_overlay.dat", "quantum vs classical center",
                {"t", "mean_q", "q_classical"});
      written.push_back(dir / "kostin_overlay.dat");
      written.push_back(dir / "kostin_overlay.plt");
    }
  }

  if (std::filesystem::exists(dir / "snapshots.csv")) {
    const auto table = read_csv(dir / "snapshots.csv");
    write_matrix_dat(dir / "density_over_time.dat", table, "t", "q", "density");
    written.push_back(dir / "density_over_time.dat");
  }
  return written;
}

}  // namespace qha::cli
