// Command-line front end: dataset building, training, grid rendering,
// single-cell inversion, gesture simulation and the live session server.

#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <pthread.h>
#include <sstream>

#include "snakesynth/dataset.hpp"
#include "snakesynth/latent_grid.hpp"
#include "snakesynth/model_io.hpp"
#include "snakesynth/record_file.hpp"
#include "snakesynth/server.hpp"
#include "snakesynth/synth.hpp"
#include "snakesynth/wav.hpp"

namespace fs = std::filesystem;
using namespace snakesynth;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitMissingFile = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitUsage = 64;

struct CliError : std::runtime_error {
  CliError(int code, std::string kind, const std::string& message)
      : std::runtime_error(message), exit_code(code), kind(std::move(kind)) {}
  int exit_code;
  std::string kind;
};

int report(int code, std::string_view kind, std::string_view message) {
  std::cerr << nlohmann::json{{"error", kind}, {"exit", code}, {"message", message}}.dump() << std::endl;
  return code;
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw CliError(kExitMissingFile, "missing_file", "no such file or directory: " + path.string());
}

Cell parse_cell(const std::string& text, std::size_t n) {
  std::size_t i = 0, j = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> i >> comma >> j) || comma != ',' || !in.eof()) {
    throw CliError(kExitUsage, "invalid_flag", "--cell expects i,j, got '" + text + "'");
  }
  if (i >= n || j >= n) {
    throw CliError(kExitUsage, "invalid_flag",
                   "--cell " + text + " is outside a " + std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
  return {i, j};
}

Generator load_generator(const fs::path& path) {
  require_exists(path);
  return load_model(path).state.generator;
}

std::vector<SpectralImage> load_training_images(const fs::path& path) {
  require_exists(path);
  Dataset ds = fs::is_directory(path) ? build_dataset(path) : load_dataset(path);
  for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(ds.images);
}

void write_loss_csv(const fs::path& path, const std::vector<StepLosses>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(9);
  out << "step,g_loss,d_loss\n";
  for (std::size_t k = 0; k < history.size(); ++k) out << k + 1 << ',' << history[k].g_loss << ',' << history[k].d_loss << '\n';
}

ClipBank grid_sounds(const Generator& gen, std::size_t n, const std::string& cache) {
  return build_grid_sounds(gen, GridSpec{n, 0.95}, CellInverter(), cache.empty() ? fs::path() : fs::path(cache));
}

int serve(const Generator& gen, std::size_t n, const std::string& cache, const std::string& address,
          unsigned short port, const std::string& ui) {
  const GridSpec spec{n, 0.95};
  ServerConfig config;
  config.address = address;
  config.port = port;
  if (!ui.empty()) {
    require_exists(ui);
    std::ifstream in(ui, std::ios::binary);
    config.index_html.assign(std::istreambuf_iterator<char>(in), {});
  }
  const ClipBank bank = grid_sounds(gen, n, cache);
  config.mosaic_pgm = encode_pgm(render_mosaic(gen, spec));

  // Block termination signals before any server thread starts, then wait for one here.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Server server(bank, spec, config);
  server.start();
  std::cout << "listening on http://" << address << ':' << server.port() << " (session endpoint /session)"
            << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-based GAN sound synthesizer"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Convert a directory of WAV files into a Mel image dataset");
  std::string build_dir, build_out = "dataset.ssds", build_manifest;
  build->add_option("dir", build_dir, "Directory with *.wav files")->required();
  build->add_option("-o,--output", build_out, "Dataset file to write");
  build->add_option("--manifest", build_manifest, "Optional JSON-lines manifest");

  // make-tones
  auto* tones = app.add_subcommand("make-tones", "Write the synthetic tone corpus");
  std::string tones_dir;
  std::size_t tones_count = 8;
  tones->add_option("dir", tones_dir, "Output directory")->required();
  tones->add_option("--count", tones_count, "Number of tones")->check(CLI::Range(1, 64));

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the GAN (batch size 1)");
  std::string train_data, train_out = "model.ssyn", train_losses, train_resume, train_form = "non_saturating";
  std::size_t epochs = 300;
  std::uint64_t seed = 7;
  train_cmd->add_option("dataset", train_data, "Dataset file or WAV directory")->required();
  train_cmd->add_option("--epochs", epochs, "Total epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", seed, "Random seed");
  train_cmd->add_option("-o,--output", train_out, "Model file to write");
  train_cmd->add_option("--losses", train_losses, "CSV file for per-step losses");
  train_cmd->add_option("--resume", train_resume, "Continue from a model saved with training state");
  train_cmd->add_option("--loss-form", train_form, "Generator loss")
      ->check(CLI::IsMember({"non_saturating", "minimax"}));

  // render-grid
  auto* grid = app.add_subcommand("render-grid", "Render the N x N mosaic of generator outputs");
  std::string grid_model, grid_out = "mosaic.pgm", grid_sounds_dir;
  std::size_t grid_n = 5;
  grid->add_option("model", grid_model, "Model file")->required();
  grid->add_option("--n", grid_n, "Cells per side")->check(CLI::Range(1, 64));
  grid->add_option("-o,--output", grid_out, "PGM file to write");
  grid->add_option("--sounds", grid_sounds_dir, "Also invert every cell into this clip cache directory");

  // invert
  auto* inv = app.add_subcommand("invert", "Invert one grid cell to audio");
  std::string inv_model, inv_cell, inv_out;
  std::size_t inv_n = 5;
  bool inv_pcm16 = false;
  inv->add_option("model", inv_model, "Model file")->required();
  inv->add_option("--cell", inv_cell, "Cell as i,j")->required();
  inv->add_option("--n", inv_n, "Cells per side")->check(CLI::Range(1, 64));
  inv->add_option("-o,--output", inv_out, "WAV file (default cell_i_j.wav)");
  inv->add_flag("--pcm16", inv_pcm16, "Write 16-bit PCM instead of float");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Render a simulated gesture offline");
  std::string sim_model, sim_kind, sim_out = "gesture.wav", sim_cache;
  std::size_t sim_n = 5;
  std::uint64_t sim_seed = 1;
  GestureParams gesture;
  sim->add_option("model", sim_model, "Model file")->required();
  sim->add_option("--gesture", sim_kind, "click | linear | direction_change | circular | chaotic")
      ->required()
      ->check(CLI::IsMember({"click", "linear", "direction_change", "circular", "chaotic"}));
  sim->add_option("--n", sim_n, "Cells per side")->check(CLI::Range(1, 64));
  sim->add_option("--duration", gesture.duration, "Seconds")->check(CLI::PositiveNumber);
  sim->add_option("--speed", gesture.speed, "Pad widths per second")->check(CLI::NonNegativeNumber);
  sim->add_option("--period", gesture.period, "Circular period in seconds")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed for the chaotic gesture");
  sim->add_option("--cache", sim_cache, "Clip cache directory");
  sim->add_option("-o,--output", sim_out, "WAV file to write");

  // serve
  auto* srv = app.add_subcommand("serve", "Serve the live session endpoint");
  std::string srv_model, srv_address = "127.0.0.1", srv_cache, srv_ui;
  std::size_t srv_n = 5;
  unsigned short srv_port = 8080;
  srv->add_option("model", srv_model, "Model file")->required();
  srv->add_option("--port", srv_port, "TCP port (0 = any free port)");
  srv->add_option("--address", srv_address, "Bind address");
  srv->add_option("--n", srv_n, "Cells per side")->check(CLI::Range(1, 64));
  srv->add_option("--cache", srv_cache, "Clip cache directory");
  srv->add_option("--ui", srv_ui, "HTML file served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitUsage, "invalid_flag", e.what());
  }

  try {
    if (*build) {
      require_exists(build_dir);
      const Dataset ds = build_dataset(build_dir);
      for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << '\n';
      save_dataset(build_out, ds);
      if (!build_manifest.empty()) write_manifest(build_manifest, ds);
      std::cout << "wrote " << ds.images.size() << " images to " << build_out << '\n';
    } else if (*tones) {
      const auto files = write_synthetic_tones(tones_dir, tones_count);
      std::cout << "wrote " << files.size() << " tones to " << tones_dir << '\n';
    } else if (*train_cmd) {
      const std::vector<SpectralImage> images = load_training_images(train_data);
      TrainState state = TrainState::fresh(seed);
      if (!train_resume.empty()) {
        require_exists(train_resume);
        LoadedModel loaded = load_model(train_resume);
        if (!loaded.has_training_state) {
          throw CliError(kExitUsage, "invalid_flag", "--resume model has no training state");
        }
        state = std::move(loaded.state);
      }
      const std::size_t g_params = state.generator.param_count();
      std::printf("generator %zu parameters (%.1f per output pixel), discriminator %zu\n", g_params,
                  static_cast<double>(g_params) / 4096.0, state.discriminator.param_count());
      TrainOptions options;
      options.loss_form = train_form == "minimax" ? GeneratorLossForm::minimax : GeneratorLossForm::non_saturating;
      try {
        train(state, images, epochs, options, [epochs](const EpochSummary& s) {
          std::printf("epoch %zu/%zu g_loss=%.6f d_loss=%.6f\n", s.epoch, epochs, s.mean_g_loss, s.mean_d_loss);
          std::fflush(stdout);
        });
      } catch (const TrainingDiverged& e) {
        if (!train_losses.empty()) write_loss_csv(train_losses, state.loss_history);
        return report(kExitDiverged, "diverged", e.what());
      }
      save_model(train_out, state);
      if (!train_losses.empty()) write_loss_csv(train_losses, state.loss_history);
      std::cout << "wrote " << train_out << " (" << state.loss_history.size() << " steps)\n";
    } else if (*grid) {
      const Generator gen = load_generator(grid_model);
      const GrayImage mosaic = render_mosaic(gen, GridSpec{grid_n, 0.95});
      write_pgm(grid_out, mosaic);
      std::cout << "wrote " << grid_out << " (" << mosaic.width << "x" << mosaic.height << ")\n";
      if (!grid_sounds_dir.empty()) {
        const ClipBank bank = grid_sounds(gen, grid_n, grid_sounds_dir);
        std::cout << (bank.loaded_from_cache ? "clip cache up to date in " : "wrote clip cache to ") << grid_sounds_dir
                  << '\n';
      }
    } else if (*inv) {
      const Cell cell = parse_cell(inv_cell, inv_n);
      const Generator gen = load_generator(inv_model);
      const CellInverter inverter;
      const AudioClip clip =
          inverter.invert(generator_forward(gen, cell_to_latent(cell, GridSpec{inv_n, 0.95}), gen.default_mode()));
      const std::string out =
          inv_out.empty() ? "cell_" + std::to_string(cell.i) + "_" + std::to_string(cell.j) + ".wav" : inv_out;
      write_wav(out, AudioBuffer{clip.samples, inverter.config().sample_rate},
                inv_pcm16 ? WavEncoding::pcm16 : WavEncoding::float32);
      std::cout << "wrote " << out << " (" << clip.samples.size() << " samples)\n";
    } else if (*sim) {
      const Generator gen = load_generator(sim_model);
      const GridSpec spec{sim_n, 0.95};
      const ClipBank bank = grid_sounds(gen, sim_n, sim_cache);
      const auto events = simulate_gesture(parse_gesture_kind(sim_kind), gesture, sim_seed);
      const auto triggers = pointer_to_triggers(events, spec);
      const int rate = AudioConfig{}.sample_rate;
      const AudioBuffer audio = render(ScheduledMix(bank, rate, triggers));
      write_wav(sim_out, audio);
      std::cout << "wrote " << sim_out << " (" << triggers.size() << " triggers, " << audio.samples.size()
                << " samples)\n";
    } else if (*srv) {
      return serve(load_generator(srv_model), srv_n, srv_cache, srv_address, srv_port, srv_ui);
    }
  } catch (const CliError& e) {
    return report(e.exit_code, e.kind, e.what());
  } catch (const ChecksumError& e) {
    return report(kExitFailure, "checksum", e.what());
  } catch (const FormatError& e) {
    return report(kExitFailure, "format", e.what());
  } catch (const std::exception& e) {
    return report(kExitFailure, "failed", e.what());
  }
  return 0;
}
