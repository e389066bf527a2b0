#!/usr/bin/env python3
"""Convert a dated-rewards choice table to the rtpref CSV schema.

Each trial offers an immediate amount against a larger amount after a delay.
Output rows use d = 2 with

    x = [immediate_amount, 0]        (smaller reward now)
    y = [delayed_amount, delay]      (larger reward later)
    choice = 1 if the immediate option was chosen, else -1
    rt = response time in seconds

Assumptions, none of which can be checked from the table itself:

* delay is copied as given; its unit (days, weeks) is whatever the source
  uses, and the fitted discount factor is per that unit;
* response times are in milliseconds unless --rt-seconds is passed;
* rows with a missing or non-positive response time are dropped and counted
  on stderr;
* row order within each subject is kept, so the first --n-train rows used by
  `rtpref evaluate` are the earliest trials.

Column names of the source table are set with the --*-col options.
"""

import argparse
import csv
import sys


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("source", help="input CSV")
    p.add_argument("output", help="output CSV in the rtpref schema")
    p.add_argument("--subject-col", default="subject")
    p.add_argument("--immediate-col", default="amount_now")
    p.add_argument("--delayed-col", default="amount_later")
    p.add_argument("--delay-col", default="delay")
    p.add_argument("--choice-col", default="choice", help="1 = immediate chosen, 0 = delayed chosen")
    p.add_argument("--rt-col", default="rt")
    p.add_argument("--rt-seconds", action="store_true", help="response times are already in seconds")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    scale = 1.0 if args.rt_seconds else 1e-3
    dropped = 0
    with open(args.source, newline="") as src, open(args.output, "w", newline="") as dst:
        reader = csv.DictReader(src)
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(["agent_id", "x_1", "x_2", "y_1", "y_2", "choice", "rt"])
        for line, row in enumerate(reader, start=2):
            try:
                rt = float(row[args.rt_col]) * scale
                choice = int(float(row[args.choice_col]))
                now = float(row[args.immediate_col])
                later = float(row[args.delayed_col])
                delay = float(row[args.delay_col])
            except (KeyError, ValueError) as e:
                sys.exit(f"{args.source}:{line}: {e}")
            if not rt > 0:
                dropped += 1
                continue
            if choice not in (0, 1):
                sys.exit(f"{args.source}:{line}: choice must be 0 or 1")
            writer.writerow([row[args.subject_col], now, 0, later, delay, 1 if choice == 1 else -1, rt])
    if dropped:
        print(f"dropped {dropped} row(s) without a positive response time", file=sys.stderr)


if __name__ == "__main__":
    main()
