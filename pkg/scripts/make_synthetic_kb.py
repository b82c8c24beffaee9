"""
Write a synthetic bilingual knowledge base and a run config to disk

Two isomorphic random graphs, a fraction of their triples aligned, held-out
entity identity pairs as ILLs. The result is ready for `mtranse train`.

Run: python scripts/make_synthetic_kb.py OUT_DIR [--entities 50] [--epochs 200] ...
"""
import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.services.synthetic_kb import SyntheticKbService


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("out_dir")
    parser.add_argument("--entities", type=int, default=50)
    parser.add_argument("--relations", type=int, default=5)
    parser.add_argument("--triples", type=int, default=200)
    parser.add_argument("--aligned", type=float, default=0.6, help="Fraction of triples aligned")
    parser.add_argument("--held-out", type=float, default=0.2, help="Fraction of entities kept out of the aligned triples")
    parser.add_argument("--languages", nargs=2, default=["en", "fr"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--variant", default="var4")
    parser.add_argument("--dim", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=200)
    args = parser.parse_args()

    print("=" * 60)
    print("Synthetic bilingual knowledge base")
    print("=" * 60)

    synthetic = SyntheticKbService.isomorphic_bilingual(
        num_entities=args.entities,
        num_relations=args.relations,
        num_triples=args.triples,
        aligned_fraction=args.aligned,
        seed=args.seed,
        languages=tuple(args.languages),
        held_out_fraction=args.held_out,
    )
    config = SyntheticKbService.write_files(
        synthetic, args.out_dir,
        variant=args.variant, dim=args.dim, learning_rate=0.01, alpha=5, epochs=args.epochs,
        seed=args.seed, project_relations="true", output_dir="run",
    )
    kb = synthetic.kb
    first, second = synthetic.pair
    print(f"✓ {first}: {kb.graphs[first].num_entities} entities, {len(kb.graphs[first].triples)} triples")
    print(f"✓ {second}: {kb.graphs[second].num_entities} entities, {len(kb.graphs[second].triples)} triples")
    print(f"✓ aligned pairs: {len(kb.alignments[(first, second)])}, ILLs: {len(synthetic.ill)}")
    print(f"✓ run config: {config}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
