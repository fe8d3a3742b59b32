#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "robopaint.h"

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path dir = fs::temp_directory_path() / "rp_capi_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_disc_target(const char* path, int n) {
  rp_canvas* c = nullptr;
  REQUIRE(rp_canvas_create(n, n, 1.0, &c) == RP_OK);
  rp_canvas_save_pgm(c, path); // white background placeholder
  rp_canvas_free(c);
  // overwrite pixel data with a centered disc via raw PGM bytes
  std::string pgm = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = x + 0.5 - n / 2.0, dy = y + 0.5 - n / 2.0;
      pgm.push_back(dx * dx + dy * dy <= 0.09 * n * n ? '\0' : '\xff');
    }
  std::ofstream out(path, std::ios::binary);
  out << pgm;
}

} // namespace

TEST_CASE("canvas lifecycle and error codes") {
  rp_canvas* c = nullptr;
  CHECK(rp_canvas_create(8, 6, 1.0, &c) == RP_OK);
  CHECK(rp_canvas_width(c) == 8);
  CHECK(rp_canvas_height(c) == 6);

  auto path = (tmp_dir() / "canvas.pgm").string();
  CHECK(rp_canvas_save_pgm(c, path.c_str()) == RP_OK);
  rp_canvas* back = nullptr;
  CHECK(rp_canvas_load_pgm(path.c_str(), &back) == RP_OK);
  CHECK(rp_canvas_width(back) == 8);
  rp_canvas_free(back);
  rp_canvas_free(c);

  CHECK(rp_canvas_create(-1, 5, 1.0, &c) == RP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(rp_last_error()) > 0);
  CHECK(rp_canvas_load_pgm("/nonexistent/file.pgm", &back) == RP_ERR_IO);
  CHECK(rp_canvas_create(4, 4, 1.0, nullptr) == RP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("paint, quantize, emit through the C API") {
  fs::path dir = tmp_dir();
  auto target_path = (dir / "target.pgm").string();
  write_disc_target(target_path.c_str(), 24);

  rp_canvas* target = nullptr;
  REQUIRE(rp_canvas_load_pgm(target_path.c_str(), &target) == RP_OK);

  rp_sbr_config sbr;
  rp_sbr_config_init(&sbr);
  CHECK(sbr.budget == 250);
  CHECK(sbr.proposals_per_step == 64);
  sbr.budget = 20;
  sbr.proposals_per_step = 16;
  sbr.refine_iters = 6;
  sbr.seed = 5;

  auto trace_path = (dir / "trace.csv").string();
  rp_strokes* strokes = nullptr;
  REQUIRE(rp_paint(target, &sbr, trace_path.c_str(), &strokes) == RP_OK);
  size_t n = rp_strokes_count(strokes);
  CHECK(n > 0);
  CHECK(n <= 20);

  rp_stroke s;
  REQUIRE(rp_strokes_get(strokes, 0, &s) == RP_OK);
  CHECK(s.r0 > 0.0);
  CHECK(s.r0 <= 0.25);
  CHECK(rp_strokes_get(strokes, n, &s) == RP_ERR_INVALID_ARGUMENT);

  std::string trace = slurp(trace_path);
  CHECK(trace.rfind("stroke_index,mse\n", 0) == 0);

  auto strokes_path = (dir / "out.strokes.jsonl").string();
  REQUIRE(rp_strokes_save_jsonl(strokes, strokes_path.c_str()) == RP_OK);
  rp_strokes* loaded = nullptr;
  REQUIRE(rp_strokes_load_jsonl(strokes_path.c_str(), &loaded) == RP_OK);
  CHECK(rp_strokes_count(loaded) == n);

  rp_quantizer_config qc;
  rp_quantizer_config_init(&qc);
  CHECK(qc.k_gray == 5);
  CHECK(qc.k_thickness == 4);
  qc.seed = 3;
  rp_strokes* quantized = nullptr;
  rp_palette* palette = nullptr;
  if (n >= 5) {
    REQUIRE(rp_quantize(loaded, &qc, &quantized, &palette) == RP_OK);
    CHECK(rp_palette_gray_count(palette) <= 5);
    CHECK(rp_palette_thickness_count(palette) <= 4);

    auto palette_path = (dir / "palette.json").string();
    REQUIRE(rp_palette_save_json(palette, palette_path.c_str()) == RP_OK);
    rp_palette* pal2 = nullptr;
    REQUIRE(rp_palette_load_json(palette_path.c_str(), &pal2) == RP_OK);
    CHECK(rp_palette_gray_count(pal2) == rp_palette_gray_count(palette));

    rp_frame_config frame;
    rp_frame_config_init(&frame);
    CHECK(frame.step_mm == 2.0);
    rp_program* prog = nullptr;
    REQUIRE(rp_build_program(quantized, palette, &frame, &prog) == RP_OK);
    CHECK(rp_program_action_count(prog) > 0);

    auto prog_path = (dir / "prog.rprog").string();
    REQUIRE(rp_program_save(prog, prog_path.c_str()) == RP_OK);
    rp_program* prog2 = nullptr;
    REQUIRE(rp_program_load(prog_path.c_str(), &prog2) == RP_OK);
    CHECK(rp_program_action_count(prog2) == rp_program_action_count(prog));

    // emitting unquantized strokes against this palette is a data error
    rp_program* bad = nullptr;
    CHECK(rp_build_program(loaded, palette, &frame, &bad) == RP_ERR_DATA);

    rp_program_free(prog);
    rp_program_free(prog2);
    rp_palette_free(pal2);
    rp_palette_free(palette);
    rp_strokes_free(quantized);
  }

  // preview render through the API
  rp_canvas* preview = nullptr;
  REQUIRE(rp_canvas_create(24, 24, 1.0, &preview) == RP_OK);
  CHECK(rp_strokes_render(strokes, preview, 2) == RP_OK);

  rp_canvas_free(preview);
  rp_strokes_free(loaded);
  rp_strokes_free(strokes);
  rp_canvas_free(target);
}

TEST_CASE("quantize with infeasible k reports a data error") {
  fs::path dir = tmp_dir();
  auto path = (dir / "two.strokes.jsonl").string();
  std::ofstream out(path);
  out << R"({"x0":0.1,"y0":0.1,"x1":0.5,"y1":0.5,"x2":0.9,"y2":0.9,"r0":0.1,"r1":0.1,"g":0.5})"
      << "\n"
      << R"({"x0":0.2,"y0":0.2,"x1":0.5,"y1":0.5,"x2":0.8,"y2":0.8,"r0":0.05,"r1":0.05,"g":0.7})"
      << "\n";
  out.close();
  rp_strokes* seq = nullptr;
  REQUIRE(rp_strokes_load_jsonl(path.c_str(), &seq) == RP_OK);
  rp_quantizer_config qc;
  rp_quantizer_config_init(&qc); // k_gray = 5 > 2 strokes
  rp_strokes* q = nullptr;
  rp_palette* p = nullptr;
  CHECK(rp_quantize(seq, &qc, &q, &p) == RP_ERR_DATA);
  rp_strokes_free(seq);
}

TEST_CASE("mocap ingestion and replay through the C API") {
  fs::path dir = tmp_dir();
  auto csv_path = (dir / "stream.csv").string();
  std::ofstream out(csv_path);
  out << "frame,time,x,y,z,yaw,pitch,roll\n";
  // hover, one 20-frame dip, hover again
  int frame = 0;
  for (int i = 0; i < 15; ++i, ++frame)
    out << frame << ',' << frame / 120.0 << ",10,10,8,0,0,0\n";
  for (int i = 0; i < 20; ++i, ++frame)
    out << frame << ',' << frame / 120.0 << ',' << 10 + i << ",10,0.5,5,0,0\n";
  for (int i = 0; i < 15; ++i, ++frame)
    out << frame << ',' << frame / 120.0 << ",40,10,9,0,0,0\n";
  out.close();

  rp_mocap_config mc;
  rp_mocap_config_init(&mc);
  CHECK(mc.z_cut_mm == 2.0);
  auto samples_path = (dir / "samples.jsonl").string();
  size_t count = 0;
  REQUIRE(rp_ingest_mocap(csv_path.c_str(), nullptr, "sheetX", &mc, samples_path.c_str(),
                          &count) == RP_OK);
  CHECK(count == 1);

  rp_samples* samples = nullptr;
  REQUIRE(rp_samples_load_jsonl(samples_path.c_str(), &samples) == RP_OK);
  CHECK(rp_samples_count(samples) == 1);

  rp_frame_config frame_cfg;
  rp_frame_config_init(&frame_cfg);
  rp_program* prog = nullptr;
  REQUIRE(rp_motion_to_program(samples, 0, &frame_cfg, &prog) == RP_OK);
  CHECK(rp_program_action_count(prog) == 62); // 60 moves + begin/end
  CHECK(rp_motion_to_program(samples, 5, &frame_cfg, &prog) == RP_ERR_INVALID_ARGUMENT);

  rp_program_free(prog);
  rp_samples_free(samples);

  CHECK(rp_ingest_mocap("/nonexistent.csv", nullptr, nullptr, &mc, samples_path.c_str(),
                        &count) == RP_ERR_IO);
}

TEST_CASE("synthetic corpus and VAE train/sample/reconstruct through the C API") {
  fs::path dir = tmp_dir() / "corpus";
  fs::remove_all(dir);
  REQUIRE(rp_synth_corpus(dir.string().c_str(), 16, 42) == RP_OK);
  size_t pgms = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".pgm")
      ++pgms;
  CHECK(pgms == 16);

  rp_vae_config vc;
  rp_vae_config_init(&vc);
  CHECK(vc.latent_dim == 8);
  CHECK(vc.num_blocks == 6);
  CHECK(vc.epochs == 200);
  CHECK(vc.batch_size == 32);
  CHECK(vc.learning_rate == 0.0005);
  vc.num_blocks = 1;
  vc.base_channels = 4;
  vc.epochs = 2;
  vc.batch_size = 8;
  vc.seed = 9;

  auto ckpt = (tmp_dir() / "model.bvae").string();
  auto history = (tmp_dir() / "history.csv").string();
  rp_vae* model = nullptr;
  REQUIRE(rp_vae_train(dir.string().c_str(), &vc, ckpt.c_str(), history.c_str(), &model) ==
          RP_OK);
  std::string hist = slurp(history);
  CHECK(hist.rfind("epoch,loss,recon,kl\n", 0) == 0);

  rp_vae* loaded = nullptr;
  REQUIRE(rp_vae_load(ckpt.c_str(), &loaded) == RP_OK);

  fs::path sample_dir = tmp_dir() / "samples";
  fs::remove_all(sample_dir);
  REQUIRE(rp_vae_sample(loaded, 3, 7, sample_dir.string().c_str()) == RP_OK);
  size_t generated = 0;
  for (const auto& e : fs::directory_iterator(sample_dir))
    if (e.path().extension() == ".pgm")
      ++generated;
  CHECK(generated == 3);

  auto in_pgm = dir / "cell_synth_0000.pgm";
  auto out_pgm = (tmp_dir() / "recon.pgm").string();
  REQUIRE(rp_vae_reconstruct(loaded, in_pgm.string().c_str(), out_pgm.c_str()) == RP_OK);
  rp_canvas* recon = nullptr;
  REQUIRE(rp_canvas_load_pgm(out_pgm.c_str(), &recon) == RP_OK);
  CHECK(rp_canvas_width(recon) == 64);
  CHECK(rp_canvas_height(recon) == 32);

  rp_canvas_free(recon);
  rp_vae_free(loaded);
  rp_vae_free(model);

  CHECK(rp_vae_load("/nonexistent.bvae", &loaded) == RP_ERR_IO);
}

TEST_CASE("prep-strokes cuts a synthetic sheet into normalized cells") {
  fs::path dir = tmp_dir();
  // 5 x 4 grid of 20 x 20 px cells
  auto layout_path = (dir / "layout.json").string();
  std::ofstream layout(layout_path);
  layout << R"({"kind":"GRID20","cells":[)";
  for (int i = 0; i < 20; ++i) {
    if (i)
      layout << ',';
    int x = (i % 5) * 20, y = (i / 5) * 20;
    layout << "{\"index\":" << i << ",\"px\":[" << x << ',' << y << ",20,20],\"center_mm\":["
           << x + 10 << ',' << y + 10 << "]}";
  }
  layout << "]}";
  layout.close();

  auto scan_path = (dir / "scan.pgm").string();
  rp_canvas* scan = nullptr;
  REQUIRE(rp_canvas_create(100, 80, 0.9, &scan) == RP_OK);
  REQUIRE(rp_canvas_save_pgm(scan, scan_path.c_str()) == RP_OK);
  rp_canvas_free(scan);

  fs::path out_dir = dir / "cells";
  fs::remove_all(out_dir);
  int mask[4] = {0, 0, 4, 4};
  size_t count = 0;
  REQUIRE(rp_prep_strokes(scan_path.c_str(), layout_path.c_str(), mask, "s1",
                          out_dir.string().c_str(), &count) == RP_OK);
  CHECK(count == 20);
  CHECK(fs::exists(out_dir / "cell_s1_0.pgm"));
  CHECK(fs::exists(out_dir / "cell_s1_19.pgm"));

  rp_canvas* cell = nullptr;
  REQUIRE(rp_canvas_load_pgm((out_dir / "cell_s1_7.pgm").string().c_str(), &cell) == RP_OK);
  CHECK(rp_canvas_width(cell) == 64);
  CHECK(rp_canvas_height(cell) == 32);
  rp_canvas_free(cell);
}
