from treetracker.cli import main
import sys
sys.exit(main())
