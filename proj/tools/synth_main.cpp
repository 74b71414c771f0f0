// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0
//
// Generates procedural demo clips (frames + detector JSON) so the whole
// pipeline can be exercised without real footage or a pose detector.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "core/synthdata.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic demo clip generator"};
  std::string subject = "subjectA";
  std::string out_dir = "data";
  int width = 128, height = 64, frames = 32;
  double fps = 30.0, phase = 0.0;
  app.add_option("--subject", subject, "subject id (drives colors)");
  app.add_option("--out", out_dir, "output root (creates <out>/frames and <out>/poses)");
  app.add_option("--width", width, "frame width");
  app.add_option("--height", height, "frame height");
  app.add_option("--frames", frames, "number of frames");
  app.add_option("--fps", fps, "frame rate metadata");
  app.add_option("--phase", phase, "motion phase offset (distinguishes clips)");
  CLI11_PARSE(app, argc, argv);

  retarget::SynthSubjectConfig config;
  config.subject_id = subject;
  config.width = width;
  config.height = height;
  config.n_frames = frames;
  config.fps = fps;
  config.motion_phase = phase;
  try {
    retarget::write_synth_dataset(config, out_dir + "/frames", out_dir + "/poses");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::printf("wrote %d frames for %s under %s\n", frames, subject.c_str(), out_dir.c_str());
  return 0;
}
