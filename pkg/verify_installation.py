#!/usr/bin/env python3
"""Verify a holosim installation: packages, modules, a smoke computation and the CLI."""

import subprocess
import sys
from pathlib import Path


def check_imports():
    """Check that every required module can be imported."""
    print("Checking imports...")

    required_modules = {
        'Core': [
            'numpy',
            'scipy',
            'dotenv',
            'rich',
        ],
        'Testing': [
            'pytest',
            'hypothesis',
        ],
        'holosim': [
            'holosim.optics.gaussian_core',
            'holosim.optics.wick_moments',
            'holosim.optics.fock_oracle',
            'holosim.experiment.holometer',
            'holosim.experiment.noise_sim',
            'holosim.utils.config',
            'holosim.main',
        ]
    }

    all_ok = True
    for category, modules in required_modules.items():
        print(f"\n{category}:")
        for module in modules:
            try:
                __import__(module)
                print(f"  ✓ {module}")
            except ImportError as e:
                print(f"  ✗ {module} - {e}")
                all_ok = False

    return all_ok


def check_files():
    """Check that the documentation and test files are present."""
    print("\n\nChecking files...")

    required_files = [
        'README.md',
        'QUICKSTART.md',
        'requirements.txt',
        'test_holometer.py',
        'test_fock_oracle.py',
        'test_numerics.py',
    ]

    all_ok = True
    for file in required_files:
        if Path(file).exists():
            print(f"  ✓ {file}")
        else:
            print(f"  ✗ {file} - NOT FOUND")
            all_ok = False

    return all_ok


def check_engine():
    """Reproduce the squeezed-light uncertainty at mu=100, lambda=0.5."""
    print("\n\nChecking the moment engine...")

    try:
        from holosim.experiment import holometer
        from holosim.experiment.holometer import Family, HolometerConfig

        config = HolometerConfig.default(Family.SQ, 100.0, 0.5)
        engine = holometer.u0(config)
        closed = holometer.u0_sq_closed(100.0, 0.5)
    except Exception as e:
        print(f"  ✗ engine check failed: {e}")
        return False

    if abs(engine - closed) <= 1e-9 * closed:
        print(f"  ✓ U0 = {engine:.6e} (closed form {closed:.6e})")
        return True
    print(f"  ✗ U0 = {engine:.6e} disagrees with closed form {closed:.6e}")
    return False


def test_cli_help():
    """Test the CLI help command."""
    print("\n\nTesting CLI...")

    try:
        result = subprocess.run(
            [sys.executable, '-m', 'holosim', '--help'],
            capture_output=True,
            text=True,
            timeout=30
        )
        if result.returncode == 0 and 'usage:' in result.stdout:
            print("  ✓ CLI help working")
            return True
        print("  ✗ CLI help failed")
        return False
    except Exception as e:
        print(f"  ✗ CLI test failed: {e}")
        return False


def main():
    """Run all verification checks."""
    print("=" * 60)
    print("holosim Installation Verification")
    print("=" * 60)

    results = {
        'Imports': check_imports(),
        'Files': check_files(),
        'Engine': check_engine(),
        'CLI': test_cli_help(),
    }

    print("\n" + "=" * 60)
    print("Summary:")
    print("=" * 60)

    all_passed = True
    for check, passed in results.items():
        status = "✓ PASS" if passed else "✗ FAIL"
        print(f"{check:20s} {status}")
        if not passed:
            all_passed = False

    print("=" * 60)

    if all_passed:
        print("\n🎉 All checks passed! holosim is ready to use.")
        print("\nQuick Start:")
        print("  holosim validate")
        print("  holosim sweep-fig2 --out fig2.csv")
        return 0

    print("\n⚠ Some checks failed. Run: pip install -r requirements.txt")
    return 1


if __name__ == "__main__":
    sys.exit(main())
