"""CLI: `python -m gml_loader verify <dataset_dir>`."""

import argparse
import sys

from .loader import load, verify


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="gml_loader")
    sub = ap.add_subparsers(dest="command", required=True)
    p_verify = sub.add_parser("verify", help="validate a dataset directory against its manifest")
    p_verify.add_argument("dataset_dir")
    p_info = sub.add_parser("info", help="print dataset counts and dims")
    p_info.add_argument("dataset_dir")
    args = ap.parse_args(argv)

    if args.command == "verify":
        problems = verify(args.dataset_dir)
        if problems:
            for p in problems:
                print(p, file=sys.stderr)
            return 1
        print("ok")
        return 0

    ds = load(args.dataset_dir)
    for name, iris in ds.node_iris.items():
        content = ds.content_features.get(name)
        topo = ds.topology_features.get(name)
        print(f"node {name}: {len(iris)} nodes, content_dim={0 if content is None else content.shape[1]}, "
              f"topology_dim={0 if topo is None else topo.shape[1]}")
    for name, index in ds.edge_index.items():
        feat = ds.edge_features.get(name)
        src, dst = ds.edge_endpoints[name]
        print(f"edge {name}: {index.shape[1]} edges {src}->{dst}, "
              f"feature_dim={0 if feat is None else feat.shape[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
