"""Even-initialization verification lab - Main package."""

# Load environment variables from .env file at package import time
from dotenv import load_dotenv
load_dotenv()

__version__ = "1.0.0"
