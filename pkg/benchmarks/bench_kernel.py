"""Benchmark the compiled simulation kernel against the numpy fallback."""

from beepmis.bench import main

if __name__ == "__main__":
    main()
