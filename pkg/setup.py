"""
Bootstraps a local virtual environment for the laboratory:

    python setup.py            # create ./venv and install requirements.txt
    python setup.py --check    # additionally run the numerical smoke test
"""
import os
import subprocess
import sys
import venv

PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
VENV_DIR = os.path.join(PROJECT_ROOT, "venv")


def run_command(command_list):
    print(f"--- Running: {' '.join(command_list)}")
    result = subprocess.run(command_list, text=True, capture_output=True)
    if result.returncode != 0:
        print(f"--- ERROR: Command failed with exit code {result.returncode}")
        print(f"--- STDOUT: {result.stdout}")
        print(f"--- STDERR: {result.stderr}")
        sys.exit(1)
    return result


def venv_python() -> str:
    if sys.platform == "win32":
        return os.path.join(VENV_DIR, "Scripts", "python.exe")
    return os.path.join(VENV_DIR, "bin", "python")


def main(argv):
    if not os.path.exists(VENV_DIR):
        print(f"--- Creating virtual environment in: {VENV_DIR}")
        venv.create(VENV_DIR, with_pip=True, prompt="speclab")

    python_exe = venv_python()
    if not os.path.exists(python_exe):
        print(f"--- ERROR: Virtual environment python not found at {python_exe}")
        sys.exit(1)

    run_command([python_exe, "-m", "pip", "install", "--upgrade", "pip"])
    run_command([python_exe, "-m", "pip", "install", "-r", os.path.join(PROJECT_ROOT, "requirements.txt")])

    if "--check" in argv:
        result = run_command([python_exe, os.path.join(PROJECT_ROOT, "test_setup.py")])
        print(result.stdout.rstrip())

    print("\n--- Setup complete! ---")
    print("Activate the environment with:")
    print(r".\venv\Scripts\Activate.ps1" if sys.platform == "win32" else "source venv/bin/activate")


if __name__ == "__main__":
    main(sys.argv[1:])
