# UAV-FSO Relay Toolkit
