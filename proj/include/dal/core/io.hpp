#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace dal {

// deterministic number -> text (CSV/SVG must be bit-stable across runs)
std::string fmt_f(double v);   // %.9g  (float-precision payloads)
std::string fmt_d(double v);   // %.12g (double-precision metrics)

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& text);

// CSV with a leading provenance comment (config hash + seed)
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            std::uint64_t seed, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void flush();

 private:
  std::ofstream out_;
  size_t ncols_;
};

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Minimal self-contained line chart (fixed palette, linear axes).
void write_svg_chart(const std::filesystem::path& path,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<Series>& series,
                     std::uint64_t config_hash, std::uint64_t seed);

// binary 8-bit PGM, values scaled from [0,1]
void write_pgm(const std::filesystem::path& path, const float* data, int w,
               int h);

// Runs argv[0..] as a child process; returns its exit code (-1 on spawn
// failure). stdout/stderr are redirected to log_path when non-empty.
int run_subprocess(const std::vector<std::string>& argv,
                   const std::filesystem::path& log_path);

}  // namespace dal
