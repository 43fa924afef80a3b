"""Command-line front end: synth -> fit / itq -> hash -> eval, plus info.

Every subcommand is deterministic given its flags: all randomness flows
from explicit ``--seed`` values, so reruns produce byte-identical files.
Errors print a one-line diagnostic on stderr and exit with status 1.
"""

import argparse
import sys

from . import dataio
from .baselines import ItqConfig, itq_fit
from .errors import HQuantError
from .householder import decompose_orthogonal
from .losses import LossKind
from .retrieval import map_at_k, sign_binarize
from .trainer import TrainConfig, fit

PROG = "hquant"


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _build_parser():
    parser = _Parser(
        prog=PROG,
        description="Binary hashing of embeddings via trained Householder rotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "synth",
        help="generate a rotated-hypercube dataset (train/query/db EMB1 + labels)",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--out-prefix", required=True, help="prefix for the six output files")
    p.add_argument("--n-per-class", type=int, required=True, help="training points per class")
    p.add_argument("--classes", type=int, required=True, help="number of classes")
    p.add_argument("--bits", type=int, required=True, help="embedding width / code width k")
    p.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0,
                   help="sample seed; the planted rotation uses seed+1")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser(
        "fit",
        help="train a Householder rotation minimizing a quantization loss",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--embeddings", required=True, help="training embeddings (EMB1)")
    p.add_argument("--loss", choices=[kind.value for kind in LossKind], default="l2",
                   help="quantization loss to minimize")
    p.add_argument("--lr", type=float, default=None,
                   help="learning rate (default: 0.1, or 0.01 for bit-var)")
    p.add_argument("--epochs", type=int, default=300, help="full passes over the data")
    p.add_argument("--batch", type=int, default=128, help="mini-batch size")
    p.add_argument("--seed", type=int, default=0, help="seed for init and shuffling")
    p.add_argument("--out", required=True, help="output rotation (ROT1)")
    p.add_argument("--log", default=None,
                   help="optional per-epoch loss log: 'epoch<TAB>mean_loss' lines")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "itq",
        help="fit the iterative-Procrustes baseline rotation",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--embeddings", required=True, help="training embeddings (EMB1)")
    p.add_argument("--iters", type=int, default=50, help="alternating-minimization rounds")
    p.add_argument("--seed", type=int, default=0, help="seed for the initial rotation")
    p.add_argument("--center", action="store_true", help="subtract column means before fitting")
    p.add_argument("--out", required=True, help="output rotation (ROT1)")
    p.set_defaults(func=_cmd_itq)

    p = sub.add_parser(
        "hash",
        help="binarize embeddings into packed codes",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--embeddings", required=True, help="embeddings to hash (EMB1)")
    p.add_argument("--rotation", default=None, help="optional rotation (ROT1)")
    p.add_argument("--out", required=True, help="output codes (HSH1)")
    p.set_defaults(func=_cmd_hash)

    p = sub.add_parser(
        "eval",
        help="rank a database per query and report mAP@k",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--query-emb", required=True)
    p.add_argument("--query-hash", required=True)
    p.add_argument("--query-labels", required=True)
    p.add_argument("--db-emb", required=True)
    p.add_argument("--db-hash", required=True)
    p.add_argument("--db-labels", required=True)
    p.add_argument("--k", type=int, required=True, help="evaluation cutoff k_eval")
    p.add_argument("--verbose", action="store_true", help="also print one AP per query")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("info", help="print format metadata of a data file")
    p.add_argument("file", help="EMB1 / ROT1 / HSH1 / label file")
    p.set_defaults(func=_cmd_info)

    return parser


def _cmd_synth(args):
    config = dataio.SynthConfig(
        n_per_class=args.n_per_class,
        num_classes=args.classes,
        k=args.bits,
        noise_sigma=args.sigma,
        planted_rotation_seed=args.seed + 1,
        sample_seed=args.seed,
    )
    splits = dataio.generate_rotated_hypercube(config)
    for name, split in zip(("train", "query", "db"), splits):
        dataio.write_emb1(f"{args.out_prefix}.{name}.emb1", split)
        dataio.write_labels(f"{args.out_prefix}.{name}.labels", split.labels)
    return 0


def _cmd_fit(args):
    embeddings = dataio.read_emb1(args.embeddings)
    config = TrainConfig(
        loss=LossKind(args.loss),
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
    )
    stack, report = fit(embeddings, config)
    dataio.write_rot1(args.out, stack)
    if args.log is not None:
        with open(args.log, "w", encoding="utf-8") as fh:
            for epoch, loss in enumerate(report.epoch_losses, start=1):
                fh.write(f"{epoch}\t{loss!r}\n")
    return 0


def _cmd_itq(args):
    embeddings = dataio.read_emb1(args.embeddings)
    config = ItqConfig(iterations=args.iters, seed=args.seed, center=args.center)
    rotation = itq_fit(embeddings, config)
    # codes are sign(V R); acting on column vectors that is R^T
    dataio.write_rot1(args.out, decompose_orthogonal(rotation.T))
    return 0


def _cmd_hash(args):
    embeddings = dataio.read_emb1(args.embeddings)
    stack = dataio.read_rot1(args.rotation) if args.rotation else None
    dataio.write_hsh1(args.out, sign_binarize(embeddings, stack))
    return 0


def _cmd_eval(args):
    query_emb = dataio.attach_labels(
        dataio.read_emb1(args.query_emb), dataio.read_labels(args.query_labels)
    )
    db_emb = dataio.attach_labels(
        dataio.read_emb1(args.db_emb), dataio.read_labels(args.db_labels)
    )
    query_codes = dataio.read_hsh1(args.query_hash)
    db_codes = dataio.read_hsh1(args.db_hash)
    result = map_at_k(query_emb, query_codes, db_emb, db_codes, args.k)
    print(f"map@{result.k_eval} = {result.map_at_k!r}")
    if args.verbose:
        for i, ap in enumerate(result.per_query_ap):
            print(f"ap[{i}] = {ap!r}")
    return 0


def _cmd_info(args):
    with open(args.file, "rb") as fh:
        magic = fh.read(4)
    if magic == dataio.EMB_MAGIC:
        emb = dataio.read_emb1(args.file)
        print(f"EMB1 embeddings: n={emb.n} k={emb.k}")
    elif magic == dataio.ROT_MAGIC:
        stack = dataio.read_rot1(args.file)
        print(f"ROT1 rotation: k={stack.dim} m={len(stack)}")
    elif magic == dataio.HSH_MAGIC:
        codes = dataio.read_hsh1(args.file)
        print(f"HSH1 codes: n={codes.n} k={codes.k}")
    else:
        labels = dataio.read_labels(args.file)
        if not labels:
            raise _CliError(f"{args.file}: unrecognized file format")
        ids = sorted(set().union(*labels)) if any(labels) else []
        print(f"labels: n={len(labels)} distinct_ids={len(ids)}")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (HQuantError, OSError, ValueError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
