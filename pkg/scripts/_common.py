"""Helpers shared by the scripts: argument parsing and pulse loading."""
import argparse
import logging
from pathlib import Path

from photonic_tns.config import load_config
from photonic_tns.pipeline import PulsePair, optimize_cluster_pulses


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--pulses", help="directory holding pulse_bulk.json and pulse_last.json")
    p.add_argument("--out", default="out/scripts", help="output directory")
    return p


def setup(args):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    cfg = load_config(args.config, out=args.out)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def pulses_for(cfg, args) -> PulsePair:
    """Load pulses if a directory is given, otherwise optimise and save them next to the outputs."""
    if args.pulses:
        return PulsePair.load(args.pulses)
    pair, _ = optimize_cluster_pulses(cfg)
    pair.save(args.out)
    return pair
