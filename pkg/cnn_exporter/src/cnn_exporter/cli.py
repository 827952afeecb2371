"""Command line wrapper: cnn-export --manifest M --out F --weights W."""

import argparse
import sys

from .exporter import DEFAULT_BATCH, ExportError, export_features, read_manifest


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    parser = _Parser(
        prog="cnn-export",
        description="Export 4096-dim penultimate-layer activations for "
                    "the images listed in a manifest.")
    parser.add_argument("--manifest", required=True,
                        help="tab-separated sample_id/image_path listing")
    parser.add_argument("--out", required=True,
                        help="feature file to write")
    parser.add_argument("--weights", required=True,
                        help="local state_dict file with the model weights")
    parser.add_argument("--batch", type=int, default=DEFAULT_BATCH,
                        help="inference batch size (default %(default)s)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        manifest = read_manifest(args.manifest)
        ids, _ = export_features(manifest, args.weights, args.out,
                                 batch_size=args.batch)
    except _UsageError as exc:
        print("usage error: %s" % (exc,), file=sys.stderr)
        return 1
    except ExportError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2
    print("wrote %d vectors to %s" % (len(ids), args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
