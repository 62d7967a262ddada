#include <CLI11.hpp>

#include "forge/commands.hpp"

using cocycle::forge::RunConfig;

namespace {

void add_common_flags(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--cocycle", config.cocycle,
                  "generator family: identity, herman, herman-doubled, "
                  "herman-embedded-halfspeed, constant-diag, rotation-power, "
                  "diagonal-sine, wiggle");
  cmd->add_option("--lambda", config.lambda, "stretch parameter of the herman / constant families");
  cmd->add_option("--k", config.winding_k, "winding of the rotation-power family");
  cmd->add_option("--c", config.sine_c, "amplitude of the diagonal-sine family");
  cmd->add_option("--dim", config.dim, "dimension for identity / constant-diag (2 or 3)")
      ->check(CLI::IsMember({2, 3}));
  cmd->add_option("--alpha", config.alpha_spec,
                  "rotation constant: p/q (exact rational), 'golden', or a decimal");
  cmd->add_option("--convention", config.convention, "herman rotation orientation: ccw or cw")
      ->check(CLI::IsMember({"ccw", "cw"}));
  cmd->add_flag("--embed", config.embed,
                "extend an SL(2) cocycle through the neutral-dimension embedding "
                "instead of requiring a nullhomotopic loop");
  cmd->add_option("--n", config.n, "orbit length / estimator depth");
  cmd->add_option("--grid", config.grid, "theta-grid size (or base-point count)");
  cmd->add_option("--nmax", config.n_max, "two-sided integer-time horizon for verification");
  cmd->add_option("--step", config.step, "RK4 integrator step (must divide 1)");
  cmd->add_option("--seed", config.seed, "seed fixing every stochastic choice");
  cmd->add_option("--threads", config.threads, "worker threads for grid sweeps (0 = auto)");
  cmd->add_option("--out", config.out_dir, "output directory (default $COCYCLE_FORGE_OUT or ./out)");
  cmd->add_flag("--svg", config.svg, "also emit SVG charts");
  cmd->fallthrough();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for continuous-time extensions of SL(d) "
               "cocycles over circle rotations"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file; keys live in a [<command>] section "
                 "(or use <command>.key=value), command-line flags override it");

  RunConfig config;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"classify", "homotopy class of the generator loop (winding / Z2 class)"},
      {"extend", "build a continuous-time extension and verify its contract"},
      {"lyapunov", "growth-rate series and Lyapunov spectrum estimates"},
      {"projective-orbit", "occupancy histogram of the projective skew product"},
      {"herman-demo", "full pipeline on Herman's cocycle: classify, embed, "
                      "extend, verify, compare spectra, diagnostics"},
  };
  for (const Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common_flags(cmd, config);
    cmd->callback([&config, name = std::string(sub.name)]() { config.command = name; });
  }

  // defaults tuned per command
  app.get_subcommand("projective-orbit")->preparse_callback([&config](std::size_t) {
    config.n = 1000000;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 4;
  }

  bool float_alpha = false;
  (void)cocycle::forge::parse_alpha(config.alpha_spec, &float_alpha);
  config.alpha_float_warning = float_alpha;
  if (float_alpha) {
    std::fprintf(stderr,
                 "warning: decimal rotation constant %s is a float and therefore "
                 "effectively rational; use p/q for exact periodic driving or "
                 "'golden' for the standard irrational\n",
                 config.alpha_spec.c_str());
  }

  return cocycle::forge::run_command(config);
}
