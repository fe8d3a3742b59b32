// Command-line front end for the robopaint pipeline. Talks to the shared
// library exclusively through the public C API.

#include <cinttypes>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "robopaint.h"

namespace {

// exit codes: 0 success, 1 usage error, 2 data/validation error
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int fail_status(const char* what) {
  std::fprintf(stderr, "robopaint: %s: %s\n", what, rp_last_error());
  return kExitData;
}

void log_resolved_config(const CLI::App& sub) {
  std::fprintf(stderr, "[%s]\n", sub.get_name().c_str());
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name().rfind("--", 0) != 0 || opt->get_name() == "--help")
      continue;
    std::string value = opt->count() ? opt->results().at(0) : opt->get_default_str();
    if (value.empty())
      value = "(unset)";
    std::fprintf(stderr, "  %s = %s\n", opt->get_name().c_str(), value.c_str());
  }
}

struct FrameFlags {
  rp_frame_config cfg;

  explicit FrameFlags(CLI::App* sub) {
    rp_frame_config_init(&cfg);
    sub->add_option("--origin-x", cfg.origin_x, "canvas origin x, mm")->capture_default_str();
    sub->add_option("--origin-y", cfg.origin_y, "canvas origin y, mm")->capture_default_str();
    sub->add_option("--width-mm", cfg.width_mm, "canvas width, mm")->capture_default_str();
    sub->add_option("--height-mm", cfg.height_mm, "canvas height, mm")->capture_default_str();
    sub->add_option("--z-contact", cfg.z_contact, "brush-on-paper height, mm")
        ->capture_default_str();
    sub->add_option("--z-travel", cfg.z_travel, "safe hover height, mm")->capture_default_str();
    sub->add_option("--step-mm", cfg.step_mm, "pose spacing along strokes, mm")
        ->capture_default_str();
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"image -> brushstrokes -> robot painting program"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override its values");

  // ---- paint ----------------------------------------------------------
  auto* paint = app.add_subcommand("paint", "convert a PGM image into a stroke sequence");
  std::string paint_target, paint_out, paint_trace, paint_preview;
  rp_sbr_config sbr;
  rp_sbr_config_init(&sbr);
  paint->add_option("--target", paint_target, "target image (PGM)")->required();
  paint->add_option("--out", paint_out, "output stroke sequence (.strokes.jsonl)")->required();
  paint->add_option("--budget", sbr.budget, "maximum stroke count")->capture_default_str();
  paint->add_option("--proposals", sbr.proposals_per_step, "candidates per stroke")
      ->capture_default_str();
  paint->add_option("--refine-iters", sbr.refine_iters, "hill-climb rounds per stroke")
      ->capture_default_str();
  paint->add_option("--rho", sbr.rho, "control-point restriction factor in [0,1]")
      ->capture_default_str();
  paint->add_option("--min-improvement", sbr.min_improvement, "required MSE drop per stroke")
      ->capture_default_str();
  paint->add_option("--seed", sbr.seed, "RNG seed")->required();
  paint->add_option("--trace", paint_trace, "per-stroke MSE trace CSV");
  paint->add_option("--preview", paint_preview, "rendered result preview (PGM)");

  // ---- quantize -------------------------------------------------------
  auto* quant = app.add_subcommand("quantize", "snap strokes to a small gray/thickness palette");
  std::string quant_in, quant_out, quant_palette;
  rp_quantizer_config qc;
  rp_quantizer_config_init(&qc);
  quant->add_option("--in", quant_in, "input stroke sequence")->required();
  quant->add_option("--out", quant_out, "quantized stroke sequence")->required();
  quant->add_option("--palette", quant_palette, "palette JSON output")->required();
  quant->add_option("--k-gray", qc.k_gray, "gray cluster count")->capture_default_str();
  quant->add_option("--k-thick", qc.k_thickness, "thickness cluster count")->capture_default_str();
  quant->add_option("--max-iters", qc.max_iters, "Lloyd iteration cap")->capture_default_str();
  quant->add_option("--restarts", qc.restarts, "k-means++ restarts")->capture_default_str();
  quant->add_option("--seed", qc.seed, "RNG seed")->required();

  // ---- emit -----------------------------------------------------------
  auto* emit = app.add_subcommand("emit", "turn quantized strokes into a robot program");
  std::string emit_in, emit_palette, emit_out;
  emit->add_option("--in", emit_in, "quantized stroke sequence")->required();
  emit->add_option("--palette", emit_palette, "palette JSON")->required();
  emit->add_option("--out", emit_out, "program output (.rprog)")->required();
  FrameFlags emit_frame(emit);

  // ---- replay ---------------------------------------------------------
  auto* replay = app.add_subcommand("replay", "emit a captured motion sample as a program");
  std::string replay_samples, replay_out;
  size_t replay_index = 0;
  replay->add_option("--samples", replay_samples, "motion samples (JSONL)")->required();
  replay->add_option("--index", replay_index, "sample index")->capture_default_str();
  replay->add_option("--out", replay_out, "program output (.rprog)")->required();
  FrameFlags replay_frame(replay);

  // ---- ingest-mocap ---------------------------------------------------
  auto* ingest = app.add_subcommand("ingest-mocap", "segment a mocap CSV into motion samples");
  std::string ingest_csv, ingest_layout, ingest_sheet, ingest_out;
  rp_mocap_config mc;
  rp_mocap_config_init(&mc);
  ingest->add_option("--csv", ingest_csv, "mocap stream CSV")->required();
  ingest->add_option("--out", ingest_out, "motion samples output (JSONL)")->required();
  ingest->add_option("--layout", ingest_layout, "grid layout JSON (enables cell centering)");
  ingest->add_option("--sheet", ingest_sheet, "sheet name recorded in the samples");
  ingest->add_option("--z-cut", mc.z_cut_mm, "keep frames with z below this, mm")
      ->capture_default_str();
  ingest->add_option("--min-frames", mc.min_frames, "discard shorter segments")
      ->capture_default_str();
  ingest->add_option("--max-jump", mc.max_jump_mm, "discard segments jumping farther, mm")
      ->capture_default_str();

  // ---- prep-strokes ---------------------------------------------------
  auto* prep = app.add_subcommand("prep-strokes", "cut a scanned grid sheet into stroke images");
  std::string prep_scan, prep_layout, prep_sheet, prep_dir;
  std::vector<int> prep_mask;
  prep->add_option("--scan", prep_scan, "scanned sheet (PGM)")->required();
  prep->add_option("--layout", prep_layout, "grid layout JSON")->required();
  prep->add_option("--sheet", prep_sheet, "sheet name used in output file names")->required();
  prep->add_option("--out-dir", prep_dir, "output directory")->required();
  prep->add_option("--index-mask", prep_mask, "printed-index rectangle x,y,w,h in cell pixels")
      ->expected(4)
      ->delimiter(',');

  // ---- synth-corpus ---------------------------------------------------
  auto* synth = app.add_subcommand("synth-corpus", "generate synthetic stroke images");
  std::string synth_dir;
  int synth_count = 200;
  uint64_t synth_seed = 0;
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--count", synth_count, "image count")->capture_default_str();
  synth->add_option("--seed", synth_seed, "RNG seed")->required();

  // ---- vae-train ------------------------------------------------------
  auto* vtrain = app.add_subcommand("vae-train", "train the brushstroke generator");
  std::string vtrain_corpus, vtrain_out, vtrain_history;
  rp_vae_config vc;
  rp_vae_config_init(&vc);
  vtrain->add_option("--corpus", vtrain_corpus, "directory of 64x32 stroke PGMs")->required();
  vtrain->add_option("--out", vtrain_out, "model checkpoint output (.bvae)")->required();
  vtrain->add_option("--history", vtrain_history, "loss history CSV");
  vtrain->add_option("--epochs", vc.epochs, "training epochs")->capture_default_str();
  vtrain->add_option("--batch-size", vc.batch_size, "batch size")->capture_default_str();
  vtrain->add_option("--latent", vc.latent_dim, "latent dimension")->capture_default_str();
  vtrain->add_option("--blocks", vc.num_blocks, "encoder block count")->capture_default_str();
  vtrain->add_option("--base-channels", vc.base_channels, "channels of the first block")
      ->capture_default_str();
  vtrain->add_option("--lr", vc.learning_rate, "Adam learning rate")->capture_default_str();
  vtrain->add_option("--kl-weight", vc.kl_weight, "weight of the KL term")->capture_default_str();
  vtrain->add_option("--seed", vc.seed, "RNG seed")->required();

  // ---- vae-sample -----------------------------------------------------
  auto* vsample = app.add_subcommand("vae-sample", "draw new brushstroke images");
  std::string vsample_model, vsample_dir;
  int vsample_n = 10;
  uint64_t vsample_seed = 0;
  vsample->add_option("--model", vsample_model, "model checkpoint")->required();
  vsample->add_option("--out-dir", vsample_dir, "output directory")->required();
  vsample->add_option("--n", vsample_n, "sample count")->capture_default_str();
  vsample->add_option("--seed", vsample_seed, "RNG seed")->required();

  // ---- vae-reconstruct ------------------------------------------------
  auto* vrecon = app.add_subcommand("vae-reconstruct", "round-trip an image through the model");
  std::string vrecon_model, vrecon_in, vrecon_out;
  vrecon->add_option("--model", vrecon_model, "model checkpoint")->required();
  vrecon->add_option("--in", vrecon_in, "input stroke image (PGM)")->required();
  vrecon->add_option("--out", vrecon_out, "reconstruction output (PGM)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  log_resolved_config(*sub);

  if (sub == paint) {
    rp_canvas* target = nullptr;
    if (rp_canvas_load_pgm(paint_target.c_str(), &target) != RP_OK)
      return fail_status("paint");
    rp_strokes* strokes = nullptr;
    rp_status st = rp_paint(target, &sbr, paint_trace.empty() ? nullptr : paint_trace.c_str(),
                            &strokes);
    if (st != RP_OK) {
      rp_canvas_free(target);
      return fail_status("paint");
    }
    st = rp_strokes_save_jsonl(strokes, paint_out.c_str());
    if (st == RP_OK && !paint_preview.empty()) {
      rp_canvas* preview = nullptr;
      st = rp_canvas_create(rp_canvas_width(target), rp_canvas_height(target), 1.0, &preview);
      if (st == RP_OK)
        st = rp_strokes_render(strokes, preview, 1);
      if (st == RP_OK)
        st = rp_canvas_save_pgm(preview, paint_preview.c_str());
      rp_canvas_free(preview);
    }
    std::fprintf(stderr, "paint: %zu strokes\n", rp_strokes_count(strokes));
    rp_strokes_free(strokes);
    rp_canvas_free(target);
    return st == RP_OK ? 0 : fail_status("paint");
  }

  if (sub == quant) {
    rp_strokes* in = nullptr;
    if (rp_strokes_load_jsonl(quant_in.c_str(), &in) != RP_OK)
      return fail_status("quantize");
    rp_strokes* out = nullptr;
    rp_palette* palette = nullptr;
    rp_status st = rp_quantize(in, &qc, &out, &palette);
    rp_strokes_free(in);
    if (st != RP_OK)
      return fail_status("quantize");
    st = rp_strokes_save_jsonl(out, quant_out.c_str());
    if (st == RP_OK)
      st = rp_palette_save_json(palette, quant_palette.c_str());
    std::fprintf(stderr, "quantize: %zu grays, %zu thicknesses\n",
                 rp_palette_gray_count(palette), rp_palette_thickness_count(palette));
    rp_strokes_free(out);
    rp_palette_free(palette);
    return st == RP_OK ? 0 : fail_status("quantize");
  }

  if (sub == emit) {
    rp_strokes* seq = nullptr;
    rp_palette* palette = nullptr;
    rp_program* prog = nullptr;
    rp_status st = rp_strokes_load_jsonl(emit_in.c_str(), &seq);
    if (st == RP_OK)
      st = rp_palette_load_json(emit_palette.c_str(), &palette);
    if (st == RP_OK)
      st = rp_build_program(seq, palette, &emit_frame.cfg, &prog);
    if (st == RP_OK)
      st = rp_program_save(prog, emit_out.c_str());
    if (st == RP_OK)
      std::fprintf(stderr, "emit: %zu actions\n", rp_program_action_count(prog));
    rp_strokes_free(seq);
    rp_palette_free(palette);
    rp_program_free(prog);
    return st == RP_OK ? 0 : fail_status("emit");
  }

  if (sub == replay) {
    rp_samples* samples = nullptr;
    rp_program* prog = nullptr;
    rp_status st = rp_samples_load_jsonl(replay_samples.c_str(), &samples);
    if (st == RP_OK)
      st = rp_motion_to_program(samples, replay_index, &replay_frame.cfg, &prog);
    if (st == RP_OK)
      st = rp_program_save(prog, replay_out.c_str());
    if (st == RP_OK)
      std::fprintf(stderr, "replay: %zu actions\n", rp_program_action_count(prog));
    rp_samples_free(samples);
    rp_program_free(prog);
    return st == RP_OK ? 0 : fail_status("replay");
  }

  if (sub == ingest) {
    size_t count = 0;
    rp_status st = rp_ingest_mocap(ingest_csv.c_str(),
                                   ingest_layout.empty() ? nullptr : ingest_layout.c_str(),
                                   ingest_sheet.empty() ? nullptr : ingest_sheet.c_str(), &mc,
                                   ingest_out.c_str(), &count);
    if (st != RP_OK)
      return fail_status("ingest-mocap");
    std::fprintf(stderr, "ingest-mocap: %zu samples\n", count);
    return 0;
  }

  if (sub == prep) {
    size_t count = 0;
    rp_status st = rp_prep_strokes(prep_scan.c_str(), prep_layout.c_str(),
                                   prep_mask.empty() ? nullptr : prep_mask.data(),
                                   prep_sheet.c_str(), prep_dir.c_str(), &count);
    if (st != RP_OK)
      return fail_status("prep-strokes");
    std::fprintf(stderr, "prep-strokes: %zu cells\n", count);
    return 0;
  }

  if (sub == synth) {
    if (rp_synth_corpus(synth_dir.c_str(), synth_count, synth_seed) != RP_OK)
      return fail_status("synth-corpus");
    std::fprintf(stderr, "synth-corpus: %d images\n", synth_count);
    return 0;
  }

  if (sub == vtrain) {
    rp_status st = rp_vae_train(vtrain_corpus.c_str(), &vc, vtrain_out.c_str(),
                                vtrain_history.empty() ? nullptr : vtrain_history.c_str(),
                                nullptr);
    if (st != RP_OK)
      return fail_status("vae-train");
    std::fprintf(stderr, "vae-train: wrote %s\n", vtrain_out.c_str());
    return 0;
  }

  if (sub == vsample) {
    rp_vae* model = nullptr;
    rp_status st = rp_vae_load(vsample_model.c_str(), &model);
    if (st == RP_OK)
      st = rp_vae_sample(model, vsample_n, vsample_seed, vsample_dir.c_str());
    rp_vae_free(model);
    if (st != RP_OK)
      return fail_status("vae-sample");
    std::fprintf(stderr, "vae-sample: %d images\n", vsample_n);
    return 0;
  }

  if (sub == vrecon) {
    rp_vae* model = nullptr;
    rp_status st = rp_vae_load(vrecon_model.c_str(), &model);
    if (st == RP_OK)
      st = rp_vae_reconstruct(model, vrecon_in.c_str(), vrecon_out.c_str());
    rp_vae_free(model);
    if (st != RP_OK)
      return fail_status("vae-reconstruct");
    return 0;
  }

  std::fprintf(stderr, "robopaint: unknown subcommand\n");
  return kExitUsage;
}
