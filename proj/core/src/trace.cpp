#include "pcfill/trace.h"

#include <cstdio>
#include <fstream>

#include "binary_io.h"
#include "pcfill/cloud_io.h"
#include "pcfill/errors.h"

namespace pcfill {

namespace {

void write_f32(const std::filesystem::path& path, const double* values, std::size_t count) {
  auto f = detail::open_out(path);
  for (std::size_t i = 0; i < count; ++i) {
    detail::put<float>(f, static_cast<float>(values[i]));
  }
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

void write_meta(const std::filesystem::path& path, int rows, int cols) {
  auto f = detail::open_out(path);
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), "%d %d\n", rows, cols);
  f.write(buf, n);
}

}  // namespace

void write_trace(const std::filesystem::path& dir, const CompletionTrace& trace) {
  std::filesystem::create_directories(dir);
  write_cloud_pcb(dir / "p_c.pcb", trace.p_c);
  write_cloud_pcb(dir / "p_0.pcb", trace.p_0);
  write_cloud_pcb(dir / "p_1.pcb", trace.p_1);
  write_cloud_pcb(dir / "p_2.pcb", trace.p_2);
  for (int l = 0; l < 2; ++l) {
    const std::string tag = std::to_string(l + 1);
    const auto& alpha = trace.gates[l].alpha;
    write_f32(dir / ("alpha_" + tag + ".f32"), alpha.data(), alpha.size());
    const auto& attn = trace.attentions[l];
    write_f32(dir / ("attn_" + tag + ".f32"), attn.data().data(), attn.data().size());
    write_meta(dir / ("attn_" + tag + ".meta"), attn.rows(), attn.cols());
  }
}

}  // namespace pcfill
