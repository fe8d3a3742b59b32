/* robopaint — image → brushstrokes → robot painting program, plus the
 * artist-demonstration data pipeline and a brushstroke VAE.
 *
 * C API over the C++ core: opaque handles, status codes, UTF-8 paths.
 * Every function returning rp_status leaves a human-readable message for
 * the calling thread in rp_last_error() on failure.
 */

#ifndef ROBOPAINT_H
#define ROBOPAINT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rp_status {
  RP_OK = 0,
  RP_ERR_INVALID_ARGUMENT = 1, /* bad parameter or handle */
  RP_ERR_IO = 2,               /* file system failure */
  RP_ERR_DATA = 3,             /* malformed or infeasible input data */
  RP_ERR_INTERNAL = 4
} rp_status;

/* Message for the last failing call on this thread; never NULL. */
const char* rp_last_error(void);

/* ------------------------------------------------------------------ */
/* Canvases (grayscale rasters, PGM P5 on disk)                        */

typedef struct rp_canvas rp_canvas;

rp_status rp_canvas_create(int width, int height, double value, rp_canvas** out);
rp_status rp_canvas_load_pgm(const char* path, rp_canvas** out);
rp_status rp_canvas_save_pgm(const rp_canvas* c, const char* path);
int rp_canvas_width(const rp_canvas* c);
int rp_canvas_height(const rp_canvas* c);
void rp_canvas_free(rp_canvas* c);

/* ------------------------------------------------------------------ */
/* Strokes                                                             */

typedef struct rp_stroke {
  double x0, y0, x1, y1, x2, y2; /* Bezier control points, fractions of the canvas */
  double r0, r1;                 /* radii, fractions of the larger dimension, (0, 0.25] */
  double g;                      /* gray, 0 black .. 1 white */
} rp_stroke;

typedef struct rp_strokes rp_strokes; /* ordered stroke sequence */

rp_status rp_strokes_load_jsonl(const char* path, rp_strokes** out);
rp_status rp_strokes_save_jsonl(const rp_strokes* seq, const char* path);
size_t rp_strokes_count(const rp_strokes* seq);
rp_status rp_strokes_get(const rp_strokes* seq, size_t index, rp_stroke* out);
/* Renders onto `canvas` in place; supersample >= 1 smooths previews. */
rp_status rp_strokes_render(const rp_strokes* seq, rp_canvas* canvas, int supersample);
void rp_strokes_free(rp_strokes* seq);

/* ------------------------------------------------------------------ */
/* Stroke-based rendering                                              */

typedef struct rp_sbr_config {
  int budget;             /* max strokes (250) */
  int proposals_per_step; /* candidates per accepted stroke (64) */
  int refine_iters;       /* hill-climb rounds per candidate (30) */
  double rho;             /* control-point restriction in [0,1] (0) */
  double min_improvement; /* required MSE drop per stroke (1e-6) */
  uint64_t seed;
} rp_sbr_config;

void rp_sbr_config_init(rp_sbr_config* cfg);

/* Paints `target` onto a blank canvas; optional per-stroke MSE trace CSV. */
rp_status rp_paint(const rp_canvas* target, const rp_sbr_config* cfg, const char* trace_csv_path,
                   rp_strokes** out);

/* ------------------------------------------------------------------ */
/* Palette quantization                                                */

typedef struct rp_quantizer_config {
  int k_gray;      /* gray palette size (5) */
  int k_thickness; /* thickness class count (4) */
  int max_iters;   /* Lloyd iterations (100) */
  int restarts;    /* k-means++ restarts (10) */
  uint64_t seed;
} rp_quantizer_config;

void rp_quantizer_config_init(rp_quantizer_config* cfg);

typedef struct rp_palette rp_palette;

rp_status rp_quantize(const rp_strokes* seq, const rp_quantizer_config* cfg,
                      rp_strokes** out_seq, rp_palette** out_palette);
rp_status rp_palette_load_json(const char* path, rp_palette** out);
rp_status rp_palette_save_json(const rp_palette* p, const char* path);
size_t rp_palette_gray_count(const rp_palette* p);
size_t rp_palette_thickness_count(const rp_palette* p);
void rp_palette_free(rp_palette* p);

/* ------------------------------------------------------------------ */
/* Robot programs                                                      */

typedef struct rp_frame_config {
  double origin_x, origin_y;    /* mm, canvas corner in the work frame */
  double width_mm, height_mm;   /* mm, canvas extent */
  double z_contact;             /* mm, bristles on paper */
  double z_travel;              /* mm, safe hover, > z_contact */
  double step_mm;               /* pose spacing along strokes (2.0) */
} rp_frame_config;

void rp_frame_config_init(rp_frame_config* cfg);

typedef struct rp_program rp_program;

/* Quantized strokes + palette -> painting program with dip/clean/dry. */
rp_status rp_build_program(const rp_strokes* seq, const rp_palette* palette,
                           const rp_frame_config* frame, rp_program** out);
rp_status rp_program_save(const rp_program* p, const char* path);
rp_status rp_program_load(const char* path, rp_program** out);
size_t rp_program_action_count(const rp_program* p);
void rp_program_free(rp_program* p);

/* ------------------------------------------------------------------ */
/* Motion capture pipeline                                             */

typedef struct rp_mocap_config {
  double z_cut_mm;    /* keep frames with z strictly below (2.0) */
  int min_frames;     /* discard shorter segments (10) */
  double max_jump_mm; /* discard segments with larger jumps (50) */
} rp_mocap_config;

void rp_mocap_config_init(rp_mocap_config* cfg);

/* CSV stream -> segmented, filtered, centered, fixed-length samples as
 * JSON Lines. layout_json may be NULL (no cell assignment/centering).
 * Writes the number of accepted samples to *out_count when non-NULL. */
rp_status rp_ingest_mocap(const char* csv_path, const char* layout_json, const char* sheet,
                          const rp_mocap_config* cfg, const char* out_jsonl,
                          size_t* out_count);

typedef struct rp_samples rp_samples;

rp_status rp_samples_load_jsonl(const char* path, rp_samples** out);
size_t rp_samples_count(const rp_samples* s);
/* Replays sample `index` as a robot program. */
rp_status rp_motion_to_program(const rp_samples* s, size_t index, const rp_frame_config* frame,
                               rp_program** out);
void rp_samples_free(rp_samples* s);

/* ------------------------------------------------------------------ */
/* Stroke image preparation                                            */

/* Crops a scanned grid sheet per the layout, white-balances, blanks the
 * printed index (mask_xywh in cell pixels, NULL to skip), resizes to
 * 32x64, writes cell_<sheet>_<index>.pgm into out_dir. */
rp_status rp_prep_strokes(const char* scan_pgm, const char* layout_json, const int* mask_xywh,
                          const char* sheet, const char* out_dir, size_t* out_count);

/* Synthetic 32x64 training images (one random stroke each) as
 * cell_synth_<i>.pgm under out_dir. */
rp_status rp_synth_corpus(const char* out_dir, int count, uint64_t seed);

/* ------------------------------------------------------------------ */
/* Brushstroke VAE                                                     */

typedef struct rp_vae_config {
  int latent_dim;      /* 8 */
  int num_blocks;      /* 6 */
  int base_channels;   /* 16, doubling per block, capped at 128 */
  double leaky_slope;  /* 0.2 */
  int epochs;          /* 200 */
  int batch_size;      /* 32 */
  double learning_rate;/* 0.0005 */
  double adam_beta1;   /* 0.9 */
  double adam_beta2;   /* 0.999 */
  double adam_eps;     /* 1e-8 */
  double kl_weight;    /* 1.0 */
  uint64_t seed;
} rp_vae_config;

void rp_vae_config_init(rp_vae_config* cfg);

typedef struct rp_vae rp_vae;

/* Trains on every .pgm under corpus_dir (sorted by name), writes the
 * checkpoint, optionally the epoch,loss,recon,kl history CSV. */
rp_status rp_vae_train(const char* corpus_dir, const rp_vae_config* cfg, const char* ckpt_path,
                       const char* history_csv_path, rp_vae** out);
rp_status rp_vae_load(const char* ckpt_path, rp_vae** out);
/* Decodes n standard-normal latent draws into out_dir/sample_<i>.pgm. */
rp_status rp_vae_sample(rp_vae* model, int count, uint64_t seed, const char* out_dir);
rp_status rp_vae_reconstruct(rp_vae* model, const char* in_pgm, const char* out_pgm);
void rp_vae_free(rp_vae* model);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ROBOPAINT_H */
