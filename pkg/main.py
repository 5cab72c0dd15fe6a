import sys

from dotenv import load_dotenv

from entanglement_compass.cli import main

# ENTANGLEMENT_COMPASS_LOG_LEVEL may come from a local .env file
load_dotenv()

if __name__ == "__main__":
    sys.exit(main())
