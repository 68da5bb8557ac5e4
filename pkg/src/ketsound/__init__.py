"""Image sonification: visual ket decomposition, semilinear transform to sound, MIDI output."""
