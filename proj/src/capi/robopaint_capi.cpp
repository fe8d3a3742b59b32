#include "robopaint.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "core/canvas.hpp"
#include "core/error.hpp"
#include "core/mocap.hpp"
#include "core/quantize.hpp"
#include "core/robot.hpp"
#include "core/sbr.hpp"
#include "core/stroke.hpp"
#include "core/stroke_image.hpp"
#include "core/textio.hpp"
#include "core/vae.hpp"

namespace fs = std::filesystem;

struct rp_canvas {
  rp::Canvas value;
};
struct rp_strokes {
  std::vector<rp::Stroke> value;
};
struct rp_palette {
  rp::Palette value;
};
struct rp_program {
  rp::RobotProgram value;
};
struct rp_samples {
  std::vector<rp::MotionSample> value;
};
struct rp_vae {
  rp::VaeModel value;
};

namespace {

thread_local std::string g_last_error;

rp_status to_status(rp::Errc code) {
  switch (code) {
  case rp::Errc::invalid_argument:
    return RP_ERR_INVALID_ARGUMENT;
  case rp::Errc::io:
    return RP_ERR_IO;
  case rp::Errc::infeasible:
  case rp::Errc::shape_mismatch:
  case rp::Errc::degenerate:
  case rp::Errc::unquantized_input:
  case rp::Errc::parse:
    return RP_ERR_DATA;
  }
  return RP_ERR_INTERNAL;
}

template <typename Fn> rp_status guarded(Fn&& fn) {
  try {
    fn();
    return RP_OK;
  } catch (const rp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return RP_ERR_INTERNAL;
  }
}

rp_status bad_argument(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return RP_ERR_INVALID_ARGUMENT;
}

rp::SbrConfig to_core(const rp_sbr_config& c) {
  rp::SbrConfig out;
  out.budget = c.budget;
  out.proposals_per_step = c.proposals_per_step;
  out.refine_iters = c.refine_iters;
  out.rho = c.rho;
  out.min_improvement = c.min_improvement;
  out.seed = c.seed;
  return out;
}

rp::QuantizerConfig to_core(const rp_quantizer_config& c) {
  return {c.k_gray, c.k_thickness, c.max_iters, c.restarts, c.seed};
}

rp::CanvasFrame to_core(const rp_frame_config& c) {
  return {c.origin_x, c.origin_y, c.width_mm, c.height_mm, c.z_contact, c.z_travel, c.step_mm};
}

rp::VaeConfig to_core(const rp_vae_config& c) {
  rp::VaeConfig out;
  out.latent_dim = c.latent_dim;
  out.num_blocks = c.num_blocks;
  out.base_channels = c.base_channels;
  out.leaky_slope = c.leaky_slope;
  out.epochs = c.epochs;
  out.batch_size = c.batch_size;
  out.learning_rate = c.learning_rate;
  out.adam_beta1 = c.adam_beta1;
  out.adam_beta2 = c.adam_beta2;
  out.adam_eps = c.adam_eps;
  out.kl_weight = c.kl_weight;
  out.seed = c.seed;
  return out;
}

std::vector<std::string> sorted_pgms(const std::string& dir) {
  std::vector<std::string> paths;
  if (!fs::is_directory(dir))
    rp::fail(rp::Errc::io, dir + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    rp::fail(rp::Errc::invalid_argument, "no .pgm files under " + dir);
  return paths;
}

void write_trace_csv(const rp::PaintResult& r, const std::string& path) {
  std::string out = "stroke_index,mse\n";
  for (size_t i = 0; i < r.mse_trace.size(); ++i)
    out += std::to_string(i) + ',' + rp::fmt_double(r.mse_trace[i]) + '\n';
  rp::write_file(path, out);
}

} // namespace

extern "C" {

const char* rp_last_error(void) { return g_last_error.c_str(); }

/* --- canvases --------------------------------------------------------- */

rp_status rp_canvas_create(int width, int height, double value, rp_canvas** out) {
  if (!out)
    return bad_argument("out is NULL");
  return guarded([&] { *out = new rp_canvas{rp::Canvas(width, height, value)}; });
}

rp_status rp_canvas_load_pgm(const char* path, rp_canvas** out) {
  if (!path || !out)
    return bad_argument("path/out is NULL");
  return guarded([&] { *out = new rp_canvas{rp::load_pgm(path)}; });
}

rp_status rp_canvas_save_pgm(const rp_canvas* c, const char* path) {
  if (!c || !path)
    return bad_argument("canvas/path is NULL");
  return guarded([&] { rp::save_pgm(c->value, path); });
}

int rp_canvas_width(const rp_canvas* c) { return c ? c->value.width() : 0; }
int rp_canvas_height(const rp_canvas* c) { return c ? c->value.height() : 0; }
void rp_canvas_free(rp_canvas* c) { delete c; }

/* --- strokes ---------------------------------------------------------- */

rp_status rp_strokes_load_jsonl(const char* path, rp_strokes** out) {
  if (!path || !out)
    return bad_argument("path/out is NULL");
  return guarded([&] { *out = new rp_strokes{rp::load_strokes_jsonl(path)}; });
}

rp_status rp_strokes_save_jsonl(const rp_strokes* seq, const char* path) {
  if (!seq || !path)
    return bad_argument("strokes/path is NULL");
  return guarded([&] { rp::save_strokes_jsonl(seq->value, path); });
}

size_t rp_strokes_count(const rp_strokes* seq) { return seq ? seq->value.size() : 0; }

rp_status rp_strokes_get(const rp_strokes* seq, size_t index, rp_stroke* out) {
  if (!seq || !out)
    return bad_argument("strokes/out is NULL");
  if (index >= seq->value.size())
    return bad_argument("stroke index out of range");
  const rp::Stroke& s = seq->value[index];
  *out = {s.x0, s.y0, s.x1, s.y1, s.x2, s.y2, s.r0, s.r1, s.g};
  return RP_OK;
}

rp_status rp_strokes_render(const rp_strokes* seq, rp_canvas* canvas, int supersample) {
  if (!seq || !canvas)
    return bad_argument("strokes/canvas is NULL");
  return guarded([&] {
    canvas->value = rp::render_sequence_supersampled(canvas->value, seq->value, supersample);
  });
}

void rp_strokes_free(rp_strokes* seq) { delete seq; }

/* --- painting --------------------------------------------------------- */

void rp_sbr_config_init(rp_sbr_config* cfg) {
  if (!cfg)
    return;
  rp::SbrConfig d;
  *cfg = {d.budget, d.proposals_per_step, d.refine_iters, d.rho, d.min_improvement, d.seed};
}

rp_status rp_paint(const rp_canvas* target, const rp_sbr_config* cfg, const char* trace_csv_path,
                   rp_strokes** out) {
  if (!target || !cfg || !out)
    return bad_argument("target/cfg/out is NULL");
  return guarded([&] {
    rp::PaintResult r = rp::paint(target->value, to_core(*cfg));
    if (trace_csv_path)
      write_trace_csv(r, trace_csv_path);
    *out = new rp_strokes{std::move(r.strokes)};
  });
}

/* --- quantization ----------------------------------------------------- */

void rp_quantizer_config_init(rp_quantizer_config* cfg) {
  if (!cfg)
    return;
  rp::QuantizerConfig d;
  *cfg = {d.k_gray, d.k_thickness, d.max_iters, d.restarts, d.seed};
}

rp_status rp_quantize(const rp_strokes* seq, const rp_quantizer_config* cfg,
                      rp_strokes** out_seq, rp_palette** out_palette) {
  if (!seq || !cfg || !out_seq || !out_palette)
    return bad_argument("seq/cfg/outputs is NULL");
  return guarded([&] {
    rp::QuantizeResult r = rp::quantize(seq->value, to_core(*cfg));
    *out_seq = new rp_strokes{std::move(r.strokes)};
    *out_palette = new rp_palette{std::move(r.palette)};
  });
}

rp_status rp_palette_load_json(const char* path, rp_palette** out) {
  if (!path || !out)
    return bad_argument("path/out is NULL");
  return guarded([&] { *out = new rp_palette{rp::load_palette_json(path)}; });
}

rp_status rp_palette_save_json(const rp_palette* p, const char* path) {
  if (!p || !path)
    return bad_argument("palette/path is NULL");
  return guarded([&] { rp::save_palette_json(p->value, path); });
}

size_t rp_palette_gray_count(const rp_palette* p) { return p ? p->value.grays.size() : 0; }
size_t rp_palette_thickness_count(const rp_palette* p) {
  return p ? p->value.thicknesses.size() : 0;
}
void rp_palette_free(rp_palette* p) { delete p; }

/* --- robot programs --------------------------------------------------- */

void rp_frame_config_init(rp_frame_config* cfg) {
  if (!cfg)
    return;
  rp::CanvasFrame d;
  *cfg = {d.origin_x, d.origin_y, d.width_mm, d.height_mm, d.z_contact, d.z_travel, d.step_mm};
}

rp_status rp_build_program(const rp_strokes* seq, const rp_palette* palette,
                           const rp_frame_config* frame, rp_program** out) {
  if (!seq || !palette || !frame || !out)
    return bad_argument("seq/palette/frame/out is NULL");
  return guarded([&] {
    *out = new rp_program{rp::build_program(seq->value, to_core(*frame), palette->value)};
  });
}

rp_status rp_program_save(const rp_program* p, const char* path) {
  if (!p || !path)
    return bad_argument("program/path is NULL");
  return guarded([&] { rp::save_program(p->value, path); });
}

rp_status rp_program_load(const char* path, rp_program** out) {
  if (!path || !out)
    return bad_argument("path/out is NULL");
  return guarded([&] { *out = new rp_program{rp::load_program(path)}; });
}

size_t rp_program_action_count(const rp_program* p) { return p ? p->value.actions.size() : 0; }
void rp_program_free(rp_program* p) { delete p; }

/* --- mocap ------------------------------------------------------------ */

void rp_mocap_config_init(rp_mocap_config* cfg) {
  if (!cfg)
    return;
  *cfg = {2.0, 10, 50.0};
}

rp_status rp_ingest_mocap(const char* csv_path, const char* layout_json, const char* sheet,
                          const rp_mocap_config* cfg, const char* out_jsonl, size_t* out_count) {
  if (!csv_path || !cfg || !out_jsonl)
    return bad_argument("csv_path/cfg/out_jsonl is NULL");
  return guarded([&] {
    std::vector<rp::MocapFrame> frames = rp::parse_mocap_csv(csv_path);
    std::optional<rp::GridLayout> layout;
    if (layout_json)
      layout = rp::load_layout_json(layout_json);

    std::string sheet_name = sheet ? sheet : fs::path(csv_path).stem().string();
    std::vector<rp::MotionSample> samples;
    for (auto& seg : rp::segment_by_z(frames, cfg->z_cut_mm)) {
      rp::FilterVerdict verdict = rp::quality_filter(seg, cfg->min_frames, cfg->max_jump_mm);
      if (!verdict.accept)
        continue;
      int cell = -1;
      if (layout) {
        double mx = 0, my = 0;
        for (const rp::MocapFrame& f : seg) {
          mx += f.x;
          my += f.y;
        }
        mx /= static_cast<double>(seg.size());
        my /= static_cast<double>(seg.size());
        double best = std::numeric_limits<double>::infinity();
        const rp::GridCell* best_cell = nullptr;
        for (const rp::GridCell& gc : layout->cells) {
          double d = std::hypot(mx - gc.center_x_mm, my - gc.center_y_mm);
          if (d < best) {
            best = d;
            best_cell = &gc;
          }
        }
        cell = best_cell->index;
        rp::center_segment(seg, best_cell->center_x_mm, best_cell->center_y_mm);
      }
      rp::MotionSample sample = rp::resample_fixed(seg);
      sample.sheet = sheet_name;
      sample.cell = cell;
      samples.push_back(std::move(sample));
    }
    rp::save_samples_jsonl(samples, out_jsonl);
    if (out_count)
      *out_count = samples.size();
  });
}

rp_status rp_samples_load_jsonl(const char* path, rp_samples** out) {
  if (!path || !out)
    return bad_argument("path/out is NULL");
  return guarded([&] { *out = new rp_samples{rp::load_samples_jsonl(path)}; });
}

size_t rp_samples_count(const rp_samples* s) { return s ? s->value.size() : 0; }

rp_status rp_motion_to_program(const rp_samples* s, size_t index, const rp_frame_config* frame,
                               rp_program** out) {
  if (!s || !frame || !out)
    return bad_argument("samples/frame/out is NULL");
  if (index >= s->value.size())
    return bad_argument("sample index out of range");
  return guarded([&] {
    *out = new rp_program{rp::motion_to_program(s->value[index], to_core(*frame))};
  });
}

void rp_samples_free(rp_samples* s) { delete s; }

/* --- stroke images ---------------------------------------------------- */

rp_status rp_prep_strokes(const char* scan_pgm, const char* layout_json, const int* mask_xywh,
                          const char* sheet, const char* out_dir, size_t* out_count) {
  if (!scan_pgm || !layout_json || !sheet || !out_dir)
    return bad_argument("scan/layout/sheet/out_dir is NULL");
  return guarded([&] {
    rp::Canvas scan = rp::load_pgm(scan_pgm);
    rp::GridLayout layout = rp::load_layout_json(layout_json);
    std::optional<rp::MaskRect> mask;
    if (mask_xywh)
      mask = rp::MaskRect{mask_xywh[0], mask_xywh[1], mask_xywh[2], mask_xywh[3]};
    fs::create_directories(out_dir);
    size_t count = 0;
    for (const auto& [index, cell] : rp::crop_cells(scan, layout)) {
      rp::Canvas img = rp::normalize_stroke_image(cell, mask);
      fs::path file = fs::path(out_dir) /
                      ("cell_" + std::string(sheet) + "_" + std::to_string(index) + ".pgm");
      rp::save_pgm(img, file.string());
      ++count;
    }
    if (out_count)
      *out_count = count;
  });
}

rp_status rp_synth_corpus(const char* out_dir, int count, uint64_t seed) {
  if (!out_dir)
    return bad_argument("out_dir is NULL");
  return guarded([&] {
    std::vector<rp::Canvas> images = rp::synth_corpus(count, seed);
    fs::create_directories(out_dir);
    for (size_t i = 0; i < images.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "cell_synth_%04zu.pgm", i);
      rp::save_pgm(images[i], (fs::path(out_dir) / name).string());
    }
  });
}

/* --- VAE --------------------------------------------------------------- */

void rp_vae_config_init(rp_vae_config* cfg) {
  if (!cfg)
    return;
  rp::VaeConfig d;
  *cfg = {d.latent_dim, d.num_blocks,  d.base_channels, d.leaky_slope, d.epochs,   d.batch_size,
          d.learning_rate, d.adam_beta1, d.adam_beta2,    d.adam_eps,    d.kl_weight, d.seed};
}

rp_status rp_vae_train(const char* corpus_dir, const rp_vae_config* cfg, const char* ckpt_path,
                       const char* history_csv_path, rp_vae** out) {
  if (!corpus_dir || !cfg || !ckpt_path)
    return bad_argument("corpus_dir/cfg/ckpt_path is NULL");
  return guarded([&] {
    std::vector<rp::Canvas> dataset;
    for (const std::string& path : sorted_pgms(corpus_dir))
      dataset.push_back(rp::load_pgm(path));
    auto [model, history] = rp::vae_train(dataset, to_core(*cfg));
    model.save(ckpt_path);
    if (history_csv_path)
      rp::save_loss_history_csv(history, history_csv_path);
    if (out)
      *out = new rp_vae{std::move(model)};
  });
}

rp_status rp_vae_load(const char* ckpt_path, rp_vae** out) {
  if (!ckpt_path || !out)
    return bad_argument("ckpt_path/out is NULL");
  return guarded([&] { *out = new rp_vae{rp::VaeModel::load(ckpt_path)}; });
}

rp_status rp_vae_sample(rp_vae* model, int count, uint64_t seed, const char* out_dir) {
  if (!model || !out_dir)
    return bad_argument("model/out_dir is NULL");
  return guarded([&] {
    std::vector<rp::Canvas> images = rp::vae_sample(model->value, count, seed);
    fs::create_directories(out_dir);
    for (size_t i = 0; i < images.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "sample_%04zu.pgm", i);
      rp::save_pgm(images[i], (fs::path(out_dir) / name).string());
    }
  });
}

rp_status rp_vae_reconstruct(rp_vae* model, const char* in_pgm, const char* out_pgm) {
  if (!model || !in_pgm || !out_pgm)
    return bad_argument("model/in/out is NULL");
  return guarded([&] {
    rp::Canvas input = rp::load_pgm(in_pgm);
    rp::save_pgm(rp::vae_reconstruct(model->value, input), out_pgm);
  });
}

void rp_vae_free(rp_vae* model) { delete model; }

} // extern "C"
