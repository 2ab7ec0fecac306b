import pyfairmod

pyfairmod.main()
