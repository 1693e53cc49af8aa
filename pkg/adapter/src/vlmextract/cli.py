"""CLI: `vlmextract extract --config config.json` and prompt rendering."""

from __future__ import annotations

import argparse
import logging
import sys

from .backends import build_backend
from .config import ConfigError, load_config
from .extract import extract
from .prompts import synth_prompt_render


def cmd_extract(args) -> int:
    config = load_config(args.config)
    backend = build_backend(config.model, config.device, config.embedding_dim)
    all_stats = extract(config, backend)
    failed = sum(s.failed for s in all_stats)
    written = sum(s.written for s in all_stats)
    print(f"wrote {written} records across {len(all_stats)} datasets "
          f"({failed} failed, see log) into {config.out_dir}")
    return 0


def cmd_render_prompt(args) -> int:
    print(synth_prompt_render(args.image), end="")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="vlmextract",
        description="Extract interchange-format embeddings and log-probabilities "
        "from a frozen multimodal model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run extraction per the config file")
    p.add_argument("--config", required=True, help="adapter config JSON")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("render-prompt", help="print the VQA generation prompt")
    p.add_argument("--image", required=True, help="image reference to inject")
    p.set_defaults(fn=cmd_render_prompt)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
