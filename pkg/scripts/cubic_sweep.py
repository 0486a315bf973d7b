#!/usr/bin/env python3

import argparse
import sys
from fractions import Fraction

import pandas as pd
from loguru import logger

from singpack.core.exceptions import SingpackError
from singpack.services.lattice import format_rational
from singpack.services.toric import cubic_pipeline


class CubicSweep:
    """Runs the singular-cubic packing over a grid of blow-up sizes mu"""

    def __init__(self, denominator: int):
        self.denominator = denominator

    def mus(self):
        # open interval (0, 2/3)
        return [Fraction(n, self.denominator) for n in range(1, self.denominator)
                if Fraction(n, self.denominator) < Fraction(2, 3)]

    def run(self) -> pd.DataFrame:
        rows = []
        for mu in self.mus():
            try:
                report = cubic_pipeline(mu)
            except SingpackError as e:
                logger.error(f"Cubic pipeline failed at mu = {mu}: {e}")
                raise

            ball, cubic, exceptional = report.volumes
            rows.append({
                'mu': format_rational(mu),
                'ball_volume': format_rational(ball),
                'cubic_volume': format_rational(cubic),
                'exceptional_volume': format_rational(exceptional),
                'total': format_rational(report.total),
                'gamma_cubic': format_rational(report.gammas.gammas[0]),
                'gamma_exceptional': format_rational(report.gammas.gammas[1]),
                'polytope_area': format_rational(report.polytope_area),
                'full': report.total == Fraction(1, 2),
            })

        df = pd.DataFrame(rows)
        logger.info(f"Swept {len(df)} values of mu, {int(df['full'].sum())} full packings")
        return df


def main():
    parser = argparse.ArgumentParser(description='Sweep the singular-cubic packing of CP^2 over mu')
    parser.add_argument('--denominator', type=int, default=20, help='mu runs over n/denominator')
    parser.add_argument('--output', default='cubic_sweep.csv')

    args = parser.parse_args()
    if args.denominator < 2:
        parser.error('denominator must be at least 2')

    df = CubicSweep(args.denominator).run()
    df.to_csv(args.output, index=False)
    logger.info(f"Wrote {args.output}")

    if not df['full'].all():
        sys.exit(1)


if __name__ == "__main__":
    main()
